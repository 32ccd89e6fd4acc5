#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qseg/interp.hpp"
#include "qseg/targets.hpp"

namespace qseg {

enum class Aggregator { Median, Mean };

std::string_view to_string(Aggregator a) noexcept;
Aggregator parse_aggregator(std::string_view text);

struct MeasureConfig {
    int warmup_runs = 1;
    int repetitions = 11;
    Aggregator aggregator = Aggregator::Median;
    std::uint64_t seed = 0;

    /// repetitions ≥ 3, warmup_runs ≥ 1
    void validate() const;

    friend bool operator==(const MeasureConfig&, const MeasureConfig&) = default;
};

struct TimingSample {
    ArgMap args;
    double cpu_seconds = 0.0;
    double dispersion = 0.0;  ///< sample standard deviation of the repetitions
    ClockKind clock = ClockKind::ProcessCpu;
    /// Set when the aggregate is under 100× the clock resolution.
    bool below_resolution = false;

    friend bool operator==(const TimingSample&, const TimingSample&) = default;
};

/// Warmups, then repetitions, aggregated. Measurements are serialized across
/// threads: concurrent timing would corrupt CPU-time attribution.
TimingSample measure(Target& target, const ArgMap& args, const MeasureConfig& cfg);

/// Measures several argument sets together: all warmups, then repetition r
/// of every set before repetition r + 1, so slow drift spreads evenly over
/// the sets instead of biasing some of them. Same seeds and aggregation as
/// measure().
std::vector<TimingSample> measure_batch(Target& target, std::span<const ArgMap> arg_sets,
                                        const MeasureConfig& cfg);

/// Seed used for one repetition of one argument set.
std::uint64_t repetition_seed(std::uint64_t base, const ArgMap& args, int repetition) noexcept;

struct SweepResult {
    std::string swept_variable;
    ArgMap fixed_values;
    std::vector<TimingSample> samples;
    SampleSeries series;  ///< x = swept value, y = aggregated seconds

    friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// One measurement per grid point with every other variable held at `fixed`.
SweepResult sweep_single(Target& target, const std::string& variable,
                         std::span<const std::int64_t> grid, const ArgMap& fixed,
                         const MeasureConfig& cfg);

struct VariableProfile {
    std::string variable;
    ArgMap fixed_values;
    SweepResult sweep;
    PiecewisePoly model;
};

VariableProfile profile_variable(const SweepResult& sweep, BlendMode mode = BlendMode::EndpointSecant);

enum class Interaction { Additive, Composite };

std::string_view to_string(Interaction i) noexcept;
Interaction parse_interaction(std::string_view text);

struct InteractionLabel {
    std::pair<std::string, std::string> pair;
    Interaction label = Interaction::Additive;
    /// Largest (max − min) over the difference curves of consecutive probes.
    double evidence = 0.0;
    double threshold = 0.0;
    std::vector<std::int64_t> probe_values;
    /// Mean offset between each pair of consecutive probe curves.
    std::vector<double> offsets;
};

/// Relative share a difference curve may vary by and still count as a pure
/// translation, as a share of the widest curve's range.
inline constexpr double kAdditiveRangeShare = 0.05;
/// Multiple of the pooled repetition spread tolerated as noise.
inline constexpr double kAdditiveDispersionFactor = 3.0;

/// Labels a family of sweeps of `var_a`, one per probe value of `var_b`.
/// Additive iff every consecutive difference curve is flat within
/// max(5% of the widest curve's range, 3 × pooled dispersion).
InteractionLabel label_curves(const std::string& var_a, const std::string& var_b,
                              std::span<const std::int64_t> probes,
                              std::span<const SweepResult> curves);

InteractionLabel detect_interaction(Target& target, const std::string& var_a,
                                    const std::string& var_b, std::span<const std::int64_t> grid_a,
                                    std::span<const std::int64_t> probes_b, const ArgMap& fixed,
                                    const MeasureConfig& cfg);

/// Shape comparison of two curves over the same grid.
struct CurveRelation {
    double mean_offset = 0.0;    ///< mean of upper − lower
    double offset_spread = 0.0;  ///< max − min of upper − lower
    double slope_ratio = 0.0;    ///< least-squares slope of upper over that of lower
};

CurveRelation relate_curves(const SweepResult& lower, const SweepResult& upper);

/// Sweeps pair.first over grid_a for pair.second = base + k·increment,
/// k = 0 .. steps−1. Other variables come from `base`.
std::vector<SweepResult> pairwise_sweep(Target& target,
                                        const std::pair<std::string, std::string>& pair,
                                        const ArgMap& base, std::int64_t increment, int steps,
                                        std::span<const std::int64_t> grid_a,
                                        const MeasureConfig& cfg);

struct RuntimeProfile {
    TargetSpec target;
    std::vector<VariableProfile> profiles;
    std::vector<InteractionLabel> interactions;
    /// Constants used for the coarse first pass (0, or the smallest grid value).
    ArgMap baseline_constants;
    /// Constants used for the final pass, from the coarse profiles.
    ArgMap representative_constants;
    std::optional<double> k_hint;

    const VariableProfile* find(std::string_view variable) const noexcept;
};

/// Checks that every declared variable has a valid grid (odd, ≥3, increasing).
void validate_grids(const TargetSpec& spec, const GridMap& grids);

/// Coarse pass with other variables at their baseline, final pass with them
/// at the representative input of their coarse profile, then interaction
/// labels for every variable pair.
RuntimeProfile build_runtime_profile(Target& target, const GridMap& grids,
                                     const MeasureConfig& cfg,
                                     BlendMode mode = BlendMode::EndpointSecant);

}  // namespace qseg
