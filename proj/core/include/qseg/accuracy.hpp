#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qseg/interp.hpp"

namespace qseg {

/// Reference function G(x) with the interval on which it is defined and finite.
struct ReferenceFn {
    std::string name;
    std::function<double(double)> fn;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    double operator()(double x) const { return fn(x); }
};

/// Built-in references: "log2", "cospix" (cos πx), "exp2" (2^x), "ratio" ((x−1)/x).
ReferenceFn named_reference(std::string_view name);
std::vector<std::string> reference_names();

/// Segment layout each built-in reference is usually modelled on.
struct ReferenceLayout {
    double from = 0.0;
    double to = 0.0;
    std::size_t segments = 3;
    Spacing spacing = Spacing::Uniform;
};
ReferenceLayout default_layout(std::string_view name);

struct SegmentAccuracy {
    double lo = 0.0;
    double hi = 0.0;
    double integral_reference = 0.0;
    double integral_model = 0.0;
    /// Unset when the two integrals differ in sign or either is ~0.
    std::optional<double> ratio;
};

struct AccuracyReport {
    std::vector<SegmentAccuracy> per_segment;
    double total_reference = 0.0;
    double total_model = 0.0;
    double aggregate_A = 0.0;
};

/// Absolute tolerance for reference integrals.
inline constexpr double kReferenceQuadratureTol = 1e-10;
/// Aggregates smaller than this in magnitude raise ZeroIntegral.
inline constexpr double kZeroIntegral = 1e-12;

/// Ratio of two same-signed integrals, smaller magnitude over larger, so the
/// result is in (0, 1] whichever of the two is bigger.
std::optional<double> integral_ratio(double reference, double model) noexcept;

/// Compares the summed integrals of model and reference over the model's
/// segments. Only the aggregate defines A; per-segment ratios are diagnostic.
AccuracyReport accuracy_vs(const PiecewisePoly& pw, const ReferenceFn& ref);

/// |mean(sample y) − mean(segment averages)| / max(|mean(sample y)|, 1e-12)
double validate_profile(const PiecewisePoly& pw, const SampleSeries& samples);

}  // namespace qseg
