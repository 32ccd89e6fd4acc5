#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace qseg {

/// Named integer arguments of one execution, e.g. {x: 1024, b: 50}.
using ArgMap = std::map<std::string, std::int64_t>;
using GridMap = std::map<std::string, std::vector<std::int64_t>>;

struct VariableDesc {
    std::string name;
    /// False when 0 is not a valid value; sweeps then hold the variable at its
    /// smallest grid value instead of 0.
    bool allows_zero = true;

    friend bool operator==(const VariableDesc&, const VariableDesc&) = default;
};

enum class TargetKind { Builtin, External, Synthetic };

struct TargetSpec {
    TargetKind kind = TargetKind::Builtin;
    std::string name;
    std::string command;  ///< external targets only
    std::vector<VariableDesc> variables;

    std::size_t arity() const noexcept { return variables.size(); }
    const VariableDesc* find(std::string_view var) const noexcept;
    /// Throws InvalidArgument unless arity ≥ 1 and names are unique and non-empty.
    void validate() const;

    friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

std::string_view to_string(TargetKind kind) noexcept;
TargetKind parse_target_kind(std::string_view text);

/// Where a timing came from.
enum class ClockKind {
    ProcessCpu,  ///< CPU time of this process around the timed region
    ChildCpu,    ///< user+system CPU of a spawned child process
    Wall,        ///< wall clock, used when CPU attribution is unavailable
    Synthetic,   ///< function value standing in for a time
};

std::string_view to_string(ClockKind kind) noexcept;
ClockKind parse_clock_kind(std::string_view text);

/// Something whose execution can be timed. Implementations time only the
/// algorithm itself; input generation happens outside the timed region.
class Target {
public:
    virtual ~Target() = default;

    virtual const TargetSpec& spec() const noexcept = 0;
    virtual ClockKind clock() const noexcept = 0;

    /// One execution with `args`; input data is derived from `seed` alone.
    /// Returns seconds (or the synthetic value). Throws TargetFailure.
    virtual double run(const ArgMap& args, std::uint64_t seed) = 0;

    /// Operations in one timed interval; run() · ops_per_interval() is the
    /// interval length, which is what clock resolution limits.
    virtual double ops_per_interval(const ArgMap&) const noexcept { return 1.0; }
};

/// binary-search(x), merge-sort(x), search-sort(x, b), custom(m, x, b)
std::vector<std::string> builtin_names();
std::unique_ptr<Target> make_builtin(std::string_view name);
/// Seven-point grids per variable for a builtin target.
GridMap default_grids(std::string_view builtin);

/// Runs `<command> --var NAME=VALUE ...`; exit status 0 means success.
/// The command string is split on whitespace; no shell is involved.
std::unique_ptr<Target> make_external(std::string command, std::vector<std::string> variables);

using SyntheticFn = std::function<double(const ArgMap&)>;

/// Evaluates fn instead of timing anything. With noise_rel > 0 the value is
/// multiplied by (1 + noise_rel·N(0,1)) drawn from the run seed.
std::unique_ptr<Target> make_synthetic(std::string name, std::vector<VariableDesc> variables,
                                       SyntheticFn fn, double noise_rel = 0.0);

/// Resolution of the process CPU clock in seconds.
double cpu_clock_resolution() noexcept;

/// Process CPU time in seconds.
double process_cpu_seconds() noexcept;

}  // namespace qseg
