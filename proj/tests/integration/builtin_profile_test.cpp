// Timing-based checks on the builtin targets. Results depend on the host, so
// the bounds are loose and these run apart from the unit suite.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qseg/accuracy.hpp"
#include "qseg/profiler.hpp"
#include "qseg/report_io.hpp"
#include "qseg/targets.hpp"

using namespace qseg;

namespace {

MeasureConfig cfg(std::uint64_t seed) {
    MeasureConfig c;
    c.seed = seed;
    return c;
}

double increasing_share(const SampleSeries& s) {
    std::size_t up = 0;
    for (std::size_t i = 1; i < s.size(); ++i) up += s[i].y > s[i - 1].y ? 1 : 0;
    return static_cast<double>(up) / static_cast<double>(s.size() - 1);
}

}  // namespace

class BuiltinSweep : public ::testing::TestWithParam<std::string> {};

TEST_P(BuiltinSweep, TimeGrowsWithInput) {
    auto t = make_builtin(GetParam());
    const auto grids = default_grids(GetParam());
    ArgMap fixed;
    for (const auto& v : t->spec().variables)
        if (v.name != "x") fixed[v.name] = grids.at(v.name)[grids.at(v.name).size() / 2];
    // mean over five seeded sweeps
    std::vector<SamplePoint> mean;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = sweep_single(*t, "x", grids.at("x"), fixed, cfg(seed));
        for (const auto& sample : s.samples) EXPECT_FALSE(sample.below_resolution);
        if (mean.empty()) mean.assign(s.series.points().begin(), s.series.points().end());
        else for (std::size_t i = 0; i < mean.size(); ++i) mean[i].y += s.series[i].y;
    }
    const SampleSeries avg(mean);
    EXPECT_GE(increasing_share(avg), 0.9) << format_series_csv(avg);
}

TEST_P(BuiltinSweep, ModelAverageMatchesSamples) {
    auto t = make_builtin(GetParam());
    const auto p = build_runtime_profile(*t, default_grids(GetParam()), cfg(2));
    for (const auto& vp : p.profiles) {
        EXPECT_LT(validate_profile(vp.model, vp.sweep.series), 0.1) << vp.variable;
    }
}

TEST_P(BuiltinSweep, RepeatedSweepsAgree) {
    auto t = make_builtin(GetParam());
    const auto grids = default_grids(GetParam());
    ArgMap fixed;
    for (const auto& v : t->spec().variables)
        if (v.name != "x") fixed[v.name] = grids.at(v.name).front();
    const auto a = sweep_single(*t, "x", grids.at("x"), fixed, cfg(3));
    const auto b = sweep_single(*t, "x", grids.at("x"), fixed, cfg(3));
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        const double r = b.series[i].y / a.series[i].y;
        EXPECT_GT(r, 0.5) << "x=" << a.series[i].x;
        EXPECT_LT(r, 2.0) << "x=" << a.series[i].x;
    }
}

// Same args and seed twice. Repetition spreads have heavy tails on a shared
// host (one pair in a few hundred lands far outside), so 8 of 10 must agree.
TEST_P(BuiltinSweep, MeasureRepeatsWithinDispersion) {
    auto t = make_builtin(GetParam());
    const auto grids = default_grids(GetParam());
    ArgMap args;
    for (const auto& v : t->spec().variables) args[v.name] = grids.at(v.name)[4];
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = measure(*t, args, cfg(seed));
        const auto b = measure(*t, args, cfg(seed));
        agree += std::abs(a.cpu_seconds - b.cpu_seconds) <= 3.0 * (a.dispersion + b.dispersion);
    }
    EXPECT_GE(agree, 8);
}

INSTANTIATE_TEST_SUITE_P(Builtins, BuiltinSweep,
                         ::testing::Values("binary-search", "merge-sort", "search-sort"),
                         [](const auto& info) {
                             std::string n = info.param;
                             std::replace(n.begin(), n.end(), '-', '_');
                             return n;
                         });

TEST(CustomTarget, MTimesXIsComposite) {
    auto t = make_builtin("custom");
    const auto grids = default_grids("custom");
    const std::vector<std::int64_t> probes{5, 30};
    const auto l = detect_interaction(*t, "x", "m", grids.at("x"), probes, {{"b", 64}}, cfg(4));
    EXPECT_EQ(l.label, Interaction::Composite) << "evidence " << l.evidence << " threshold " << l.threshold;
}
