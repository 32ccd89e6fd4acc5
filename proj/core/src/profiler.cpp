#include "qseg/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "qseg/error.hpp"

namespace qseg {

namespace {

std::mutex& measurement_mutex() {
    static std::mutex m;
    return m;
}

std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void check_args(const TargetSpec& spec, const ArgMap& args) {
    for (const auto& v : spec.variables) {
        if (!args.contains(v.name)) {
            throw Error(ErrorKind::InvalidArgument,
                        "no value for variable '" + v.name + "' of target '" + spec.name + "'");
        }
    }
    for (const auto& [name, value] : args) {
        if (!spec.find(name)) {
            throw Error(ErrorKind::InvalidArgument,
                        "target '" + spec.name + "' has no variable '" + name + "'");
        }
    }
}

void check_grid(const std::string& variable, std::span<const std::int64_t> grid) {
    if (grid.size() < 3) {
        throw Error(ErrorKind::GridTooSmall, "grid for '" + variable + "' has " +
                                                 std::to_string(grid.size()) +
                                                 " points; at least 3 are required");
    }
    if (grid.size() % 2 == 0) {
        throw Error(ErrorKind::EvenSeries, "grid for '" + variable +
                                               "' needs an odd number of points, got " +
                                               std::to_string(grid.size()));
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i - 1] >= grid[i]) {
            throw Error(ErrorKind::NonMonotonicX,
                        "grid for '" + variable + "' must be strictly increasing");
        }
    }
    if (grid.front() < 0) {
        throw Error(ErrorKind::InvalidArgument, "grid for '" + variable + "' has negative values");
    }
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double upper = v[n / 2];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return 0.5 * (lower + upper);
}

double stddev_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double e : v) ss += (e - m) * (e - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double curve_range(const SampleSeries& s) {
    const auto ys = s.ys();
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    return *hi - *lo;
}

double ls_slope(const SampleSeries& s) {
    const auto xs = s.xs();
    const auto ys = s.ys();
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

namespace {

// Sweeps var_a once per value of var_b, all curves measured as one batch.
std::vector<SweepResult> sweep_family(Target& target, const std::string& var_a,
                                      std::span<const std::int64_t> grid_a,
                                      const std::string& var_b,
                                      std::span<const std::int64_t> values_b, const ArgMap& fixed,
                                      const MeasureConfig& cfg) {
    const auto& spec = target.spec();
    check_grid(var_a, grid_a);
    std::vector<SweepResult> curves(values_b.size());
    std::vector<std::vector<SamplePoint>> pts(values_b.size());
    for (std::size_t k = 0; k < values_b.size(); ++k) {
        curves[k].swept_variable = var_a;
        curves[k].fixed_values = fixed;
        curves[k].fixed_values.erase(var_a);
        curves[k].fixed_values[var_b] = values_b[k];
    }
    std::vector<ArgMap> arg_sets;
    for (std::int64_t v : grid_a) {
        for (std::size_t k = 0; k < values_b.size(); ++k) {
            ArgMap args = curves[k].fixed_values;
            args[var_a] = v;
            arg_sets.push_back(std::move(args));
        }
    }
    auto samples = measure_batch(target, arg_sets, cfg);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t k = i % values_b.size();
        pts[k].push_back({static_cast<double>(grid_a[i / values_b.size()]), samples[i].cpu_seconds});
        curves[k].samples.push_back(std::move(samples[i]));
    }
    for (std::size_t k = 0; k < values_b.size(); ++k) {
        curves[k].series = SampleSeries(std::move(pts[k]), spec.name + ":" + var_a);
    }
    return curves;
}

}  // namespace

std::string_view to_string(Aggregator a) noexcept {
    return a == Aggregator::Mean ? "mean" : "median";
}

Aggregator parse_aggregator(std::string_view text) {
    if (text == "median") return Aggregator::Median;
    if (text == "mean") return Aggregator::Mean;
    throw Error(ErrorKind::InvalidArgument, "unknown aggregator '" + std::string(text) + "'");
}

std::string_view to_string(Interaction i) noexcept {
    return i == Interaction::Additive ? "Additive" : "Composite";
}

Interaction parse_interaction(std::string_view text) {
    if (text == "Additive") return Interaction::Additive;
    if (text == "Composite") return Interaction::Composite;
    throw Error(ErrorKind::ParseError, "unknown interaction label '" + std::string(text) + "'");
}

void MeasureConfig::validate() const {
    if (repetitions < 3) {
        throw Error(ErrorKind::InvalidArgument, "repetitions must be at least 3");
    }
    if (warmup_runs < 1) {
        throw Error(ErrorKind::InvalidArgument, "warmup_runs must be at least 1");
    }
}

std::uint64_t repetition_seed(std::uint64_t base, const ArgMap& args, int repetition) noexcept {
    std::uint64_t h = splitmix64(base);
    for (const auto& [name, value] : args) {
        for (char c : name) h = splitmix64(h ^ static_cast<unsigned char>(c));
        h = splitmix64(h ^ static_cast<std::uint64_t>(value));
    }
    return splitmix64(h ^ static_cast<std::uint64_t>(repetition));
}

std::vector<TimingSample> measure_batch(Target& target, std::span<const ArgMap> arg_sets,
                                        const MeasureConfig& cfg) {
    cfg.validate();
    for (const auto& args : arg_sets) check_args(target.spec(), args);

    std::lock_guard lock(measurement_mutex());
    for (int w = 0; w < cfg.warmup_runs; ++w) {
        for (const auto& args : arg_sets) {
            (void)target.run(args, repetition_seed(cfg.seed, args, -1 - w));
        }
    }
    std::vector<std::vector<double>> runs(arg_sets.size());
    for (int r = 0; r < cfg.repetitions; ++r) {
        for (std::size_t i = 0; i < arg_sets.size(); ++i) {
            runs[i].push_back(target.run(arg_sets[i], repetition_seed(cfg.seed, arg_sets[i], r)));
        }
    }

    std::vector<TimingSample> out;
    out.reserve(arg_sets.size());
    for (std::size_t i = 0; i < arg_sets.size(); ++i) {
        TimingSample s;
        s.args = arg_sets[i];
        s.clock = target.clock();
        s.cpu_seconds = cfg.aggregator == Aggregator::Median ? median_of(runs[i]) : mean_of(runs[i]);
        s.dispersion = stddev_of(runs[i]);
        if (s.clock != ClockKind::Synthetic) {
            s.cpu_seconds = std::max(0.0, s.cpu_seconds);
            const double region = s.cpu_seconds * target.ops_per_interval(s.args);
            s.below_resolution = region < 100.0 * cpu_clock_resolution();
        }
        out.push_back(std::move(s));
    }
    return out;
}

TimingSample measure(Target& target, const ArgMap& args, const MeasureConfig& cfg) {
    return measure_batch(target, std::span<const ArgMap>(&args, 1), cfg).front();
}

SweepResult sweep_single(Target& target, const std::string& variable,
                         std::span<const std::int64_t> grid, const ArgMap& fixed,
                         const MeasureConfig& cfg) {
    const auto& spec = target.spec();
    if (!spec.find(variable)) {
        throw Error(ErrorKind::InvalidArgument,
                    "target '" + spec.name + "' has no variable '" + variable + "'");
    }
    check_grid(variable, grid);
    if (fixed.contains(variable)) {
        throw Error(ErrorKind::InvalidArgument, "swept variable '" + variable + "' is also fixed");
    }

    SweepResult out;
    out.swept_variable = variable;
    out.fixed_values = fixed;
    std::vector<ArgMap> arg_sets;
    for (std::int64_t v : grid) {
        ArgMap args = fixed;
        args[variable] = v;
        arg_sets.push_back(std::move(args));
    }
    out.samples = measure_batch(target, arg_sets, cfg);
    std::vector<SamplePoint> pts;
    for (const auto& sample : out.samples) {
        pts.push_back({static_cast<double>(sample.args.at(variable)), sample.cpu_seconds});
    }
    out.series = SampleSeries(std::move(pts), spec.name + ":" + variable);
    return out;
}

VariableProfile profile_variable(const SweepResult& sweep, BlendMode mode) {
    return {sweep.swept_variable, sweep.fixed_values, sweep, build_piecewise(sweep.series, mode)};
}

InteractionLabel label_curves(const std::string& var_a, const std::string& var_b,
                              std::span<const std::int64_t> probes,
                              std::span<const SweepResult> curves) {
    if (curves.size() < 2 || curves.size() != probes.size()) {
        throw Error(ErrorKind::InvalidArgument, "need one curve per probe and at least two probes");
    }
    const std::size_t n = curves.front().series.size();
    for (const auto& c : curves) {
        if (c.series.size() != n) {
            throw Error(ErrorKind::InvalidArgument, "probe curves use different grids");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (c.series[i].x != curves.front().series[i].x) {
                throw Error(ErrorKind::InvalidArgument, "probe curves use different grids");
            }
        }
    }

    double widest = 0.0;
    double max_abs = 0.0;
    double var_sum = 0.0;
    std::size_t var_count = 0;
    for (const auto& c : curves) {
        widest = std::max(widest, curve_range(c.series));
        for (const auto& p : c.series.points()) max_abs = std::max(max_abs, std::abs(p.y));
        for (const auto& s : c.samples) {
            var_sum += s.dispersion * s.dispersion;
            ++var_count;
        }
    }
    const double pooled = var_count ? std::sqrt(var_sum / static_cast<double>(var_count)) : 0.0;

    InteractionLabel label;
    label.pair = {var_a, var_b};
    label.probe_values.assign(probes.begin(), probes.end());
    for (std::size_t k = 0; k + 1 < curves.size(); ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = curves[k + 1].series[i].y - curves[k].series[i].y;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            sum += d;
        }
        label.evidence = std::max(label.evidence, hi - lo);
        label.offsets.push_back(sum / static_cast<double>(n));
    }
    // the last term only absorbs rounding when every curve is flat
    label.threshold = std::max({kAdditiveRangeShare * widest, kAdditiveDispersionFactor * pooled,
                                1e-12 * max_abs});
    label.label = label.evidence <= label.threshold ? Interaction::Additive : Interaction::Composite;
    return label;
}

InteractionLabel detect_interaction(Target& target, const std::string& var_a,
                                    const std::string& var_b, std::span<const std::int64_t> grid_a,
                                    std::span<const std::int64_t> probes_b, const ArgMap& fixed,
                                    const MeasureConfig& cfg) {
    const auto& spec = target.spec();
    if (spec.arity() < 2) {
        throw Error(ErrorKind::InsufficientArity,
                    "target '" + spec.name + "' has a single variable; nothing to pair");
    }
    if (var_a == var_b || !spec.find(var_a) || !spec.find(var_b)) {
        throw Error(ErrorKind::InvalidArgument, "interaction needs two distinct target variables");
    }
    if (probes_b.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "at least two probe values are required");
    }
    const auto curves = sweep_family(target, var_a, grid_a, var_b, probes_b, fixed, cfg);
    return label_curves(var_a, var_b, probes_b, curves);
}

CurveRelation relate_curves(const SweepResult& lower, const SweepResult& upper) {
    const auto& a = lower.series;
    const auto& b = upper.series;
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorKind::InvalidArgument, "curves must share a grid");
    }
    CurveRelation rel;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].x != b[i].x) throw Error(ErrorKind::InvalidArgument, "curves must share a grid");
        const double d = b[i].y - a[i].y;
        rel.mean_offset += d;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    rel.mean_offset /= static_cast<double>(a.size());
    rel.offset_spread = hi - lo;
    const double sa = ls_slope(a);
    rel.slope_ratio = sa != 0.0 ? ls_slope(b) / sa : std::numeric_limits<double>::quiet_NaN();
    return rel;
}

std::vector<SweepResult> pairwise_sweep(Target& target,
                                        const std::pair<std::string, std::string>& pair,
                                        const ArgMap& base, std::int64_t increment, int steps,
                                        std::span<const std::int64_t> grid_a,
                                        const MeasureConfig& cfg) {
    if (steps < 2) throw Error(ErrorKind::InvalidArgument, "pairwise sweep needs steps >= 2");
    if (increment <= 0) throw Error(ErrorKind::InvalidArgument, "increment must be positive");
    if (target.spec().arity() < 2) {
        throw Error(ErrorKind::InsufficientArity, "pairwise sweep needs a multi-variable target");
    }
    const auto it = base.find(pair.second);
    if (it == base.end()) {
        throw Error(ErrorKind::InvalidArgument, "base has no value for '" + pair.second + "'");
    }
    std::vector<std::int64_t> values;
    for (int k = 0; k < steps; ++k) values.push_back(it->second + k * increment);
    return sweep_family(target, pair.first, grid_a, pair.second, values, base, cfg);
}

const VariableProfile* RuntimeProfile::find(std::string_view variable) const noexcept {
    auto it = std::find_if(profiles.begin(), profiles.end(),
                           [&](const VariableProfile& p) { return p.variable == variable; });
    return it == profiles.end() ? nullptr : &*it;
}

void validate_grids(const TargetSpec& spec, const GridMap& grids) {
    spec.validate();
    for (const auto& v : spec.variables) {
        auto it = grids.find(v.name);
        if (it == grids.end()) {
            throw Error(ErrorKind::InvalidArgument, "no grid for variable '" + v.name + "'");
        }
        check_grid(v.name, it->second);
    }
    for (const auto& [name, grid] : grids) {
        if (!spec.find(name)) {
            throw Error(ErrorKind::InvalidArgument,
                        "grid given for unknown variable '" + name + "'");
        }
    }
}

RuntimeProfile build_runtime_profile(Target& target, const GridMap& grids,
                                     const MeasureConfig& cfg, BlendMode mode) {
    const TargetSpec& spec = target.spec();
    validate_grids(spec, grids);
    cfg.validate();

    RuntimeProfile profile;
    profile.target = spec;
    for (const auto& v : spec.variables) {
        profile.baseline_constants[v.name] = v.allows_zero ? 0 : grids.at(v.name).front();
    }

    const auto others = [&](const std::string& var, const ArgMap& constants) {
        ArgMap f = constants;
        f.erase(var);
        return f;
    };

    std::vector<VariableProfile> coarse;
    for (const auto& v : spec.variables) {
        coarse.push_back(profile_variable(
            sweep_single(target, v.name, grids.at(v.name), others(v.name, profile.baseline_constants),
                         cfg),
            mode));
    }

    if (spec.arity() == 1) {
        profile.profiles = std::move(coarse);
        return profile;
    }

    for (std::size_t i = 0; i < spec.arity(); ++i) {
        const auto& grid = grids.at(spec.variables[i].name);
        const double rep = std::round(representative_input(coarse[i].model));
        profile.representative_constants[spec.variables[i].name] =
            std::clamp(static_cast<std::int64_t>(rep), grid.front(), grid.back());
    }
    for (const auto& v : spec.variables) {
        profile.profiles.push_back(profile_variable(
            sweep_single(target, v.name, grids.at(v.name),
                         others(v.name, profile.representative_constants), cfg),
            mode));
    }

    for (std::size_t i = 0; i < spec.arity(); ++i) {
        for (std::size_t j = i + 1; j < spec.arity(); ++j) {
            const auto& a = spec.variables[i].name;
            const auto& b = spec.variables[j].name;
            const auto& gb = grids.at(b);
            const std::vector<std::int64_t> probes{gb.front(), gb[gb.size() / 2], gb.back()};
            ArgMap fixed = profile.representative_constants;
            fixed.erase(a);
            fixed.erase(b);
            profile.interactions.push_back(
                detect_interaction(target, a, b, grids.at(a), probes, fixed, cfg));
        }
    }
    return profile;
}

}  // namespace qseg
