#include <benchmark/benchmark.h>

#include <cmath>

#include "qseg/accuracy.hpp"
#include "qseg/quadrature.hpp"

namespace {

void BM_AccuracyVs(benchmark::State& state, const char* name) {
    const auto ref = qseg::named_reference(name);
    const auto lay = qseg::default_layout(name);
    const auto pw = qseg::build_piecewise(
        qseg::sample_with_midpoints(ref.fn, qseg::segment_edges(lay.from, lay.to, lay.segments, lay.spacing)));
    for (auto _ : state) benchmark::DoNotOptimize(qseg::accuracy_vs(pw, ref));
}
BENCHMARK_CAPTURE(BM_AccuracyVs, log2, "log2");
BENCHMARK_CAPTURE(BM_AccuracyVs, cospix, "cospix");
BENCHMARK_CAPTURE(BM_AccuracyVs, exp2, "exp2");
BENCHMARK_CAPTURE(BM_AccuracyVs, ratio, "ratio");

void BM_AdaptiveSimpson(benchmark::State& state) {
    const double tol = std::pow(10.0, -double(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(qseg::adaptive_simpson([](double x) { return std::log2(x); }, 8, 64, tol));
    }
}
BENCHMARK(BM_AdaptiveSimpson)->DenseRange(4, 12, 2);

}  // namespace
