#include "qseg/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qseg/error.hpp"
#include "qseg/quadrature.hpp"

namespace qseg {

ReferenceFn named_reference(std::string_view name) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (name == "log2") {
        return {"log2", [](double x) { return std::log2(x); }, 0.0, inf};
    }
    if (name == "cospix") {
        return {"cospix", [](double x) { return std::cos(std::numbers::pi * x); }, -inf, inf};
    }
    if (name == "exp2") {
        return {"exp2", [](double x) { return std::exp2(x); }, -inf, 1000.0};
    }
    if (name == "ratio") {
        return {"ratio", [](double x) { return (x - 1.0) / x; }, 0.0, inf};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown reference function '" + std::string(name) +
                                                "' (expected log2, cospix, exp2 or ratio)");
}

std::vector<std::string> reference_names() { return {"log2", "cospix", "exp2", "ratio"}; }

ReferenceLayout default_layout(std::string_view name) {
    if (name == "log2") return {8.0, 64.0, 3, Spacing::Geometric};
    if (name == "cospix") return {0.0, 1.5, 3, Spacing::Uniform};
    if (name == "exp2") return {3.0, 6.0, 3, Spacing::Uniform};
    if (name == "ratio") return {2.0, 16.0, 3, Spacing::Geometric};
    throw Error(ErrorKind::InvalidArgument, "no default layout for '" + std::string(name) + "'");
}

std::optional<double> integral_ratio(double reference, double model) noexcept {
    if (std::abs(reference) < kZeroIntegral || std::abs(model) < kZeroIntegral) return std::nullopt;
    if (std::signbit(reference) != std::signbit(model)) return std::nullopt;
    const double r = std::abs(reference);
    const double m = std::abs(model);
    return m >= r ? r / m : m / r;
}

AccuracyReport accuracy_vs(const PiecewisePoly& pw, const ReferenceFn& ref) {
    if (pw.lo() < ref.lo || pw.hi() > ref.hi) {
        throw Error(ErrorKind::OutOfDomain,
                    "reference '" + ref.name + "' is not defined over the whole model domain");
    }
    AccuracyReport report;
    report.per_segment.reserve(pw.size());
    for (const auto& seg : pw.segments()) {
        SegmentAccuracy s;
        s.lo = seg.lo();
        s.hi = seg.hi();
        s.integral_reference =
            adaptive_simpson(ref.fn, seg.lo(), seg.hi(), kReferenceQuadratureTol).value;
        s.integral_model = seg.integrate(seg.lo(), seg.hi());
        s.ratio = integral_ratio(s.integral_reference, s.integral_model);
        report.total_reference += s.integral_reference;
        report.total_model += s.integral_model;
        report.per_segment.push_back(s);
    }
    if (std::abs(report.total_reference) < kZeroIntegral ||
        std::abs(report.total_model) < kZeroIntegral) {
        throw Error(ErrorKind::ZeroIntegral, "aggregate integral is zero; accuracy undefined");
    }
    if (std::signbit(report.total_reference) != std::signbit(report.total_model)) {
        throw Error(ErrorKind::SignMismatch, "reference and model integrals differ in sign");
    }
    report.aggregate_A = *integral_ratio(report.total_reference, report.total_model);
    return report;
}

double validate_profile(const PiecewisePoly& pw, const SampleSeries& samples) {
    if (samples.empty()) throw Error(ErrorKind::TooFewPoints, "no samples to validate against");
    for (const auto& p : samples.points()) {
        if (!pw.contains(p.x)) {
            throw Error(ErrorKind::OutOfDomain, "sample outside the model domain");
        }
    }
    const auto ys = samples.ys();
    const double lhs = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double rhs = 0.0;
    for (const auto& seg : pw.segments()) rhs += segment_average(seg);
    rhs /= static_cast<double>(pw.size());
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-12);
}

}  // namespace qseg
