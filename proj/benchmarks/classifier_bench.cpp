#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "qseg/classifier.hpp"

namespace {

qseg::SampleSeries noisy_nlogn(std::size_t n) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<qseg::SamplePoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 16.0 * std::exp2(12.0 * double(i) / double(n - 1));
        pts.push_back({x, x * std::log2(x) * (1 + noise(rng))});
    }
    return qseg::SampleSeries(pts);
}

void BM_Classify(benchmark::State& state) {
    const auto s = noisy_nlogn(static_cast<std::size_t>(state.range(0)));
    const auto candidates = qseg::default_candidates();
    for (auto _ : state) benchmark::DoNotOptimize(qseg::classify(s, candidates));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Classify)->Arg(7)->Arg(31)->Arg(201)->Arg(1001);

void BM_FitClass(benchmark::State& state) {
    const auto s = noisy_nlogn(7);
    const auto c = qseg::candidate("nlogn");
    for (auto _ : state) benchmark::DoNotOptimize(qseg::fit_class(s, c));
}
BENCHMARK(BM_FitClass);

void BM_LabelCurves(benchmark::State& state) {
    auto t = qseg::make_synthetic("sum", {{"x"}, {"b"}}, [](const qseg::ArgMap& a) {
        return std::log2(double(a.at("x"))) + double(a.at("b"));
    });
    const std::vector<std::int64_t> grid{16, 64, 256, 1024, 4096, 16384, 65536};
    const std::vector<std::int64_t> probes{0, 300, 600};
    qseg::MeasureConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qseg::detect_interaction(*t, "x", "b", grid, probes, {}, cfg));
    }
}
BENCHMARK(BM_LabelCurves);

}  // namespace
