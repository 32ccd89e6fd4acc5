#include "qseg/targets.hpp"

#include <spawn.h>
#include <sys/resource.h>
#include <sys/time.h>
#include <sys/wait.h>
#include <time.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

#include "qseg/error.hpp"

extern char** environ;

namespace qseg {

namespace {

template <typename T>
inline void do_not_optimize(const T& value) {
    asm volatile("" : : "r,m"(value) : "memory");
}

std::int64_t arg_or_throw(const ArgMap& args, const char* name) {
    auto it = args.find(name);
    if (it == args.end()) {
        throw Error(ErrorKind::InvalidArgument, std::string("missing argument '") + name + "'");
    }
    if (it->second < 0) {
        throw Error(ErrorKind::InvalidArgument, std::string("argument '") + name + "' is negative");
    }
    return it->second;
}

std::vector<std::int32_t> random_ints(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::int32_t> dist(0, 1 << 30);
    std::vector<std::int32_t> v(n);
    for (auto& e : v) e = dist(rng);
    return v;
}

class CpuStopwatch {
public:
    CpuStopwatch() : start_(process_cpu_seconds()) {}
    double elapsed() const { return process_cpu_seconds() - start_; }

private:
    double start_;
};

// ---------------------------------------------------------------------------
// builtins

// Times `chunks` calls of body(i) separately and returns the median. Short
// intervals with a median shrug off the occasional interrupted slice that
// would otherwise land in a single long interval.
template <typename Body>
double median_chunk_seconds(std::size_t chunks, Body&& body) {
    std::vector<double> t(chunks);
    for (std::size_t i = 0; i < chunks; ++i) {
        CpuStopwatch sw;
        body(i);
        t[i] = sw.elapsed();
    }
    const auto mid = t.begin() + static_cast<std::ptrdiff_t>(chunks / 2);
    std::nth_element(t.begin(), mid, t.end());
    return *mid;
}

class BuiltinTarget : public Target {
public:
    explicit BuiltinTarget(TargetSpec spec) : spec_(std::move(spec)) {}
    const TargetSpec& spec() const noexcept override { return spec_; }
    ClockKind clock() const noexcept override { return ClockKind::ProcessCpu; }

private:
    TargetSpec spec_;
};

// Random lookups in a sorted array of x elements; seconds per lookup.
class BinarySearchTarget final : public BuiltinTarget {
public:
    BinarySearchTarget() : BuiltinTarget({TargetKind::Builtin, "binary-search", {}, {{"x", true}}}) {}

    double run(const ArgMap& args, std::uint64_t seed) override {
        const auto x = static_cast<std::size_t>(arg_or_throw(args, "x"));
        std::mt19937_64 rng(seed);
        auto data = random_ints(x, rng);
        std::sort(data.begin(), data.end());
        const auto queries = random_ints(kChunks * kPerChunk, rng);

        std::size_t hits = 0;
        const double t = median_chunk_seconds(kChunks, [&](std::size_t c) {
            for (std::size_t q = c * kPerChunk; q < (c + 1) * kPerChunk; ++q) {
                auto it = std::lower_bound(data.begin(), data.end(), queries[q]);
                hits += static_cast<std::size_t>(it - data.begin());
            }
            do_not_optimize(hits);
        });
        return t / kPerChunk;
    }

    double ops_per_interval(const ArgMap&) const noexcept override { return kPerChunk; }

private:
    static constexpr std::size_t kChunks = 31;
    static constexpr std::size_t kPerChunk = 1024;
};

void merge_sort(std::vector<std::int32_t>& v, std::vector<std::int32_t>& scratch, std::size_t lo,
                std::size_t hi) {
    if (hi - lo < 2) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    merge_sort(v, scratch, lo, mid);
    merge_sort(v, scratch, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) scratch[k++] = v[j] < v[i] ? v[j++] : v[i++];
    while (i < mid) scratch[k++] = v[i++];
    while (j < hi) scratch[k++] = v[j++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
              scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
}

// Top-down merge sort of x random integers; seconds per sorted array. Small
// arrays are grouped so each timed chunk holds a comparable element count.
class MergeSortTarget final : public BuiltinTarget {
public:
    MergeSortTarget() : BuiltinTarget({TargetKind::Builtin, "merge-sort", {}, {{"x", true}}}) {}

    double run(const ArgMap& args, std::uint64_t seed) override {
        const auto x = static_cast<std::size_t>(arg_or_throw(args, "x"));
        const std::size_t per_chunk = arrays_per_chunk(x);
        const std::size_t chunks = std::max<std::size_t>(
            kMinChunks, kElementBudget / (per_chunk * std::max<std::size_t>(x, 1)));
        std::mt19937_64 rng(seed);
        std::vector<std::vector<std::int32_t>> inputs;
        inputs.reserve(chunks * per_chunk);
        for (std::size_t i = 0; i < chunks * per_chunk; ++i) inputs.push_back(random_ints(x, rng));
        std::vector<std::int32_t> scratch(x);

        const double t = median_chunk_seconds(chunks, [&](std::size_t c) {
            for (std::size_t i = c * per_chunk; i < (c + 1) * per_chunk; ++i) {
                merge_sort(inputs[i], scratch, 0, x);
                do_not_optimize(inputs[i].data());
            }
        });
        return t / static_cast<double>(per_chunk);
    }

    double ops_per_interval(const ArgMap& args) const noexcept override {
        auto it = args.find("x");
        return static_cast<double>(
            arrays_per_chunk(it == args.end() || it->second < 0 ? 0 : static_cast<std::size_t>(it->second)));
    }

private:
    static constexpr std::size_t kChunkElements = 1 << 13;
    static constexpr std::size_t kElementBudget = 1 << 18;
    static constexpr std::size_t kMinChunks = 5;

    static std::size_t arrays_per_chunk(std::size_t x) noexcept {
        return std::max<std::size_t>(1, kChunkElements / std::max<std::size_t>(x, 1));
    }
};

// Each operation runs a few binary searches in a sorted array of x elements,
// then a chain of b dependent multiplies: cost ~ log x + b. The chain touches
// no memory, so a large array cannot slow it through the cache, and it is
// bound by multiply latency, which a busy sibling thread barely moves.
class SearchSortTarget final : public BuiltinTarget {
public:
    SearchSortTarget()
        : BuiltinTarget({TargetKind::Builtin, "search-sort", {}, {{"x", true}, {"b", true}}}) {}

    double run(const ArgMap& args, std::uint64_t seed) override {
        const auto x = static_cast<std::size_t>(arg_or_throw(args, "x"));
        const auto b = static_cast<std::size_t>(arg_or_throw(args, "b"));
        std::mt19937_64 rng(seed);
        auto data = random_ints(x, rng);
        std::sort(data.begin(), data.end());
        const auto queries = random_ints(kChunks * kPerChunk * kSearches, rng);

        std::uint64_t acc = 0;
        const double t = median_chunk_seconds(kChunks, [&](std::size_t c) {
            for (std::size_t op = c * kPerChunk; op < (c + 1) * kPerChunk; ++op) {
                for (std::size_t q = 0; q < kSearches; ++q) {
                    const auto key = queries[op * kSearches + q];
                    acc += static_cast<std::uint64_t>(
                        std::lower_bound(data.begin(), data.end(), key) - data.begin());
                }
                // the empty asm keeps every step in the chain
                for (std::size_t i = 0; i < b; ++i) {
                    acc = acc * 0x9E3779B97F4A7C15ULL + i;
                    asm volatile("" : "+r"(acc));
                }
            }
            do_not_optimize(acc);
        });
        return t / kPerChunk;
    }

    double ops_per_interval(const ArgMap&) const noexcept override { return kPerChunk; }

private:
    static constexpr std::size_t kChunks = 31;
    static constexpr std::size_t kPerChunk = 128;
    static constexpr std::size_t kSearches = 4;
};

// m·x arithmetic steps plus a repeated-square-root descent of b, which takes
// ~log log b steps, each carrying a fixed block of work.
class CustomTarget final : public BuiltinTarget {
public:
    CustomTarget()
        : BuiltinTarget(
              {TargetKind::Builtin, "custom", {}, {{"m", true}, {"x", true}, {"b", true}}}) {}

    double run(const ArgMap& args, std::uint64_t seed) override {
        const auto m = static_cast<std::uint64_t>(arg_or_throw(args, "m"));
        const auto x = static_cast<std::uint64_t>(arg_or_throw(args, "x"));
        const auto b = static_cast<double>(arg_or_throw(args, "b"));
        std::mt19937_64 rng(seed);
        std::uint64_t h = rng();
        const std::uint64_t per_chunk = ops_per_chunk(m, x);

        const double t = median_chunk_seconds(kChunks, [&](std::size_t) {
            for (std::uint64_t op = 0; op < per_chunk; ++op) {
                for (std::uint64_t i = 0; i < m * x; ++i) h = h * 6364136223846793005ULL + i;
                for (double v = b; v > 2.0; v = std::sqrt(v)) {
                    for (std::uint64_t k = 0; k < kStepWork; ++k) h ^= (h << 7) + k;
                    do_not_optimize(v);
                }
            }
            do_not_optimize(h);
        });
        return t / static_cast<double>(per_chunk);
    }

    double ops_per_interval(const ArgMap& args) const noexcept override {
        const auto get = [&](const char* n) {
            auto it = args.find(n);
            return it == args.end() || it->second < 0 ? 0 : static_cast<std::uint64_t>(it->second);
        };
        return static_cast<double>(ops_per_chunk(get("m"), get("x")));
    }

private:
    static constexpr std::size_t kChunks = 31;
    static constexpr std::uint64_t kStepWork = 256;
    static constexpr std::uint64_t kChunkWork = 1 << 16;

    static std::uint64_t ops_per_chunk(std::uint64_t m, std::uint64_t x) noexcept {
        return std::max<std::uint64_t>(1, kChunkWork / (m * x + kStepWork * 8 + 1));
    }
};

// ---------------------------------------------------------------------------
// external

std::vector<std::string> split_command(const std::string& command) {
    std::istringstream is(command);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

class ExternalTarget final : public Target {
public:
    ExternalTarget(std::string command, std::vector<std::string> variables) {
        spec_.kind = TargetKind::External;
        spec_.command = std::move(command);
        argv_ = split_command(spec_.command);
        if (argv_.empty()) throw Error(ErrorKind::InvalidArgument, "empty external command");
        spec_.name = argv_.front();
        for (auto& v : variables) spec_.variables.push_back({std::move(v), true});
        spec_.validate();
    }

    const TargetSpec& spec() const noexcept override { return spec_; }
    ClockKind clock() const noexcept override { return ClockKind::ChildCpu; }

    double run(const ArgMap& args, std::uint64_t /*seed*/) override {
        std::vector<std::string> tokens = argv_;
        for (const auto& [name, value] : args) {
            tokens.push_back("--var");
            tokens.push_back(name + "=" + std::to_string(value));
        }
        std::vector<char*> argv;
        for (auto& t : tokens) argv.push_back(t.data());
        argv.push_back(nullptr);

        pid_t pid = 0;
        if (int rc = posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ); rc != 0) {
            throw Error(ErrorKind::TargetFailure,
                        "cannot start '" + spec_.command + "': " + std::strerror(rc));
        }
        int status = 0;
        rusage usage{};
        pid_t r;
        do {
            r = wait4(pid, &status, 0, &usage);
        } while (r < 0 && errno == EINTR);
        if (r < 0) throw Error(ErrorKind::TargetFailure, "wait4 failed for '" + spec_.command + "'");
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
            throw Error(ErrorKind::TargetFailure,
                        "'" + spec_.command + "' exited with status " + std::to_string(code));
        }
        const auto tv = [](const timeval& t) { return t.tv_sec + t.tv_usec * 1e-6; };
        return tv(usage.ru_utime) + tv(usage.ru_stime);
    }

private:
    TargetSpec spec_;
    std::vector<std::string> argv_;
};

// ---------------------------------------------------------------------------
// synthetic

class SyntheticTarget final : public Target {
public:
    SyntheticTarget(std::string name, std::vector<VariableDesc> variables, SyntheticFn fn,
                    double noise_rel)
        : fn_(std::move(fn)), noise_(noise_rel) {
        spec_.kind = TargetKind::Synthetic;
        spec_.name = std::move(name);
        spec_.variables = std::move(variables);
        spec_.validate();
    }

    const TargetSpec& spec() const noexcept override { return spec_; }
    ClockKind clock() const noexcept override { return ClockKind::Synthetic; }

    double run(const ArgMap& args, std::uint64_t seed) override {
        const double v = fn_(args);
        if (!std::isfinite(v)) throw Error(ErrorKind::TargetFailure, "synthetic value not finite");
        if (noise_ <= 0.0) return v;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n01;
        return v * (1.0 + noise_ * n01(rng));
    }

private:
    TargetSpec spec_;
    SyntheticFn fn_;
    double noise_;
};

}  // namespace

// ---------------------------------------------------------------------------

const VariableDesc* TargetSpec::find(std::string_view var) const noexcept {
    auto it = std::find_if(variables.begin(), variables.end(),
                           [&](const VariableDesc& v) { return v.name == var; });
    return it == variables.end() ? nullptr : &*it;
}

void TargetSpec::validate() const {
    if (variables.empty()) {
        throw Error(ErrorKind::InvalidArgument, "target '" + name + "' declares no variables");
    }
    std::set<std::string> seen;
    for (const auto& v : variables) {
        if (v.name.empty()) throw Error(ErrorKind::InvalidArgument, "empty variable name");
        if (!seen.insert(v.name).second) {
            throw Error(ErrorKind::InvalidArgument, "duplicate variable '" + v.name + "'");
        }
    }
}

std::string_view to_string(TargetKind kind) noexcept {
    switch (kind) {
    case TargetKind::Builtin: return "builtin";
    case TargetKind::External: return "external-command";
    case TargetKind::Synthetic: return "synthetic";
    }
    return "builtin";
}

TargetKind parse_target_kind(std::string_view text) {
    if (text == "builtin") return TargetKind::Builtin;
    if (text == "external-command") return TargetKind::External;
    if (text == "synthetic") return TargetKind::Synthetic;
    throw Error(ErrorKind::ParseError, "unknown target kind '" + std::string(text) + "'");
}

std::string_view to_string(ClockKind kind) noexcept {
    switch (kind) {
    case ClockKind::ProcessCpu: return "process-cpu";
    case ClockKind::ChildCpu: return "child-cpu";
    case ClockKind::Wall: return "wall";
    case ClockKind::Synthetic: return "synthetic";
    }
    return "process-cpu";
}

ClockKind parse_clock_kind(std::string_view text) {
    if (text == "process-cpu") return ClockKind::ProcessCpu;
    if (text == "child-cpu") return ClockKind::ChildCpu;
    if (text == "wall") return ClockKind::Wall;
    if (text == "synthetic") return ClockKind::Synthetic;
    throw Error(ErrorKind::ParseError, "unknown clock kind '" + std::string(text) + "'");
}

std::vector<std::string> builtin_names() {
    return {"binary-search", "merge-sort", "search-sort", "custom"};
}

std::unique_ptr<Target> make_builtin(std::string_view name) {
    if (name == "binary-search") return std::make_unique<BinarySearchTarget>();
    if (name == "merge-sort") return std::make_unique<MergeSortTarget>();
    if (name == "search-sort") return std::make_unique<SearchSortTarget>();
    if (name == "custom") return std::make_unique<CustomTarget>();
    throw Error(ErrorKind::InvalidArgument, "unknown builtin target '" + std::string(name) + "'");
}

GridMap default_grids(std::string_view builtin) {
    const std::vector<std::int64_t> pow4{16, 64, 256, 1024, 4096, 16384, 65536};
    if (builtin == "binary-search" || builtin == "merge-sort") return {{"x", pow4}};
    if (builtin == "search-sort") return {{"x", pow4}, {"b", {0, 100, 200, 300, 400, 500, 600}}};
    if (builtin == "custom") {
        return {{"m", {0, 5, 10, 15, 20, 25, 30}},
                {"x", {50, 75, 100, 125, 150, 175, 200}},
                {"b", {4, 16, 64, 256, 1024, 4096, 16384}}};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown builtin target '" + std::string(builtin) + "'");
}

std::unique_ptr<Target> make_external(std::string command, std::vector<std::string> variables) {
    return std::make_unique<ExternalTarget>(std::move(command), std::move(variables));
}

std::unique_ptr<Target> make_synthetic(std::string name, std::vector<VariableDesc> variables,
                                       SyntheticFn fn, double noise_rel) {
    return std::make_unique<SyntheticTarget>(std::move(name), std::move(variables), std::move(fn),
                                             noise_rel);
}

double cpu_clock_resolution() noexcept {
    timespec ts{};
    if (clock_getres(CLOCK_PROCESS_CPUTIME_ID, &ts) != 0) return 1e-6;
    return ts.tv_sec + ts.tv_nsec * 1e-9;
}

double process_cpu_seconds() noexcept {
    timespec ts{};
    if (clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts) != 0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    return ts.tv_sec + ts.tv_nsec * 1e-9;
}

}  // namespace qseg
