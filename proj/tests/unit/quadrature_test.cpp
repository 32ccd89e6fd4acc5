#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qseg/quadrature.hpp"

using qseg::adaptive_simpson;

TEST(AdaptiveSimpson, PolynomialsAreExact) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng), b = u(rng), c = u(rng), lo = u(rng), hi = lo + 1 + std::abs(u(rng));
        const auto f = [&](double x) { return (a * x + b) * x + c; };
        const auto F = [&](double x) { return (a / 3 * x + b / 2) * x * x + c * x; };
        const auto r = adaptive_simpson(f, lo, hi);
        EXPECT_NEAR(r.value, F(hi) - F(lo), 1e-9 * std::max(1.0, std::abs(F(hi) - F(lo))));
    }
}

TEST(AdaptiveSimpson, SmoothFunctionsAgainstClosedForm) {
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::sin(x); }, 0, std::numbers::pi).value, 2.0,
                1e-9);
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(x); }, 0, 1).value, std::numbers::e - 1,
                1e-9);
    // ∫ log2 x dx = (x ln x − x)/ln 2
    const auto F = [](double x) { return (x * std::log(x) - x) / std::numbers::ln2; };
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::log2(x); }, 8, 64).value, F(64) - F(8), 1e-9);
}

TEST(AdaptiveSimpson, AgreesWithGaussKronrod) {
    const std::vector<std::function<double(double)>> fs{
        [](double x) { return std::cos(std::numbers::pi * x); },
        [](double x) { return std::exp2(x); },
        [](double x) { return (x - 1) / x; },
        [](double x) { return std::sqrt(x) * std::log(x + 1); },
    };
    for (const auto& f : fs) {
        const double want = qseg::testing::gk_integral(f, 1.5, 6.0);
        EXPECT_NEAR(adaptive_simpson(f, 1.5, 6.0).value, want, 1e-9);
    }
}

TEST(AdaptiveSimpson, ReversedAndEmptyIntervals) {
    const auto f = [](double x) { return x * x; };
    EXPECT_EQ(adaptive_simpson(f, 2, 2).value, 0.0);
    EXPECT_NEAR(adaptive_simpson(f, 3, 0).value, -9.0, 1e-12);
}
