#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "qseg/accuracy.hpp"
#include "qseg/classifier.hpp"
#include "qseg/error.hpp"
#include "qseg/interp.hpp"
#include "qseg/profiler.hpp"
#include "qseg/report_io.hpp"
#include "qseg/targets.hpp"

namespace qseg::cli {

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

// Thrown for flag combinations CLI11 cannot express; maps to exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class T>
std::optional<T> parse_int(std::string_view s) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        parts.push_back(s.substr(pos, next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

struct ApproxOpts {
    std::string input;
    std::string fn;
    std::optional<double> from;
    std::optional<double> to;
    std::optional<std::size_t> segments;
    std::string spacing;
    std::string mode = "endpoint";
    std::string out;
    std::string plot;
};

struct ProfileOpts {
    std::string target;
    std::string exec;
    std::vector<std::string> grids;
    int reps = qseg::MeasureConfig{}.repetitions;
    int warmup = 1;
    std::optional<std::uint64_t> seed;
    std::string aggregator = "median";
    std::string mode = "endpoint";
    bool defaults = false;
    std::string out;
};

struct ClassifyOpts {
    std::string profile;
    std::string input;
    std::string candidates;
};

struct EvalOpts {
    std::string model;
    double at = 0.0;
    std::string var;
    bool derivative = false;
};

std::string fmt(double v) { return format_double(v); }

void print_model(const PiecewisePoly& pw, std::ostream& out) {
    out << "segments (" << to_string(pw.mode()) << "):\n";
    for (std::size_t i = 0; i < pw.size(); ++i) {
        const auto& s = pw[i];
        out << "  [" << i << "] " << fmt(s.lo()) << " .. " << fmt(s.hi()) << "  a=" << fmt(s.a())
            << " b=" << fmt(s.b()) << " c=" << fmt(s.c()) << "  " << to_string(concavity(s))
            << '\n';
    }
}

void print_report(const std::string& title, const ClassificationReport& rep, std::ostream& out) {
    out << title << '\n';
    for (std::size_t i = 0; i < rep.ranked.size(); ++i) {
        const auto& f = rep.ranked[i];
        out << "  " << i + 1 << ". " << f.name << "  k=" << fmt(f.k) << " C=" << fmt(f.C)
            << " nrmse=" << fmt(f.normalized_rmse) << '\n';
        for (const auto& w : f.warnings) out << "     note: " << w << '\n';
    }
}

int cmd_approx(const ApproxOpts& o, std::ostream& out, std::ostream& err) {
    // Flag validation, before any work.
    const bool from_fn = !o.fn.empty();
    if (from_fn == !o.input.empty()) throw UsageError("give exactly one of --input or --fn");
    if (!from_fn && (o.from || o.to || o.segments || !o.spacing.empty())) {
        throw UsageError("--from/--to/--segments/--spacing need --fn");
    }
    BlendMode mode;
    std::optional<ReferenceFn> ref;
    ReferenceLayout layout;
    try {
        mode = parse_blend_mode(o.mode);
        if (from_fn) {
            ref = named_reference(o.fn);
            layout = default_layout(o.fn);
            if (o.from) layout.from = *o.from;
            if (o.to) layout.to = *o.to;
            if (o.segments) layout.segments = *o.segments;
            if (!o.spacing.empty()) layout.spacing = parse_spacing(o.spacing);
        }
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (from_fn && (layout.segments == 0 || !(layout.from < layout.to))) {
        throw UsageError("need --from < --to and --segments >= 1");
    }

    ProfileDocument doc;
    doc.kind = "approx";
    doc.config.mode = mode;
    ApproxResult res;
    if (from_fn) {
        const auto edges = segment_edges(layout.from, layout.to, layout.segments, layout.spacing);
        res.source = o.fn;
        res.series = sample_with_midpoints(ref->fn, edges, o.fn);
    } else {
        res.source = o.input;
        res.series = read_series(o.input);
    }
    res.model = build_piecewise(res.series, mode);
    if (ref) res.accuracy = accuracy_vs(*res.model, *ref);

    out << "source: " << res.source << " (" << res.series.size() << " samples)\n";
    print_model(*res.model, out);
    if (res.accuracy) {
        for (std::size_t i = 0; i < res.accuracy->per_segment.size(); ++i) {
            const auto& s = res.accuracy->per_segment[i];
            out << "  [" << i << "] integral G=" << fmt(s.integral_reference)
                << " F=" << fmt(s.integral_model);
            if (s.ratio) out << " ratio=" << fmt(*s.ratio);
            out << '\n';
        }
        out << "A = " << fmt(res.accuracy->aggregate_A) << '\n';
    }
    if (!o.plot.empty()) emit_plot_data(*res.model, ref ? &*ref : nullptr, o.plot);
    doc.approx = std::move(res);
    if (!o.out.empty()) write_document(doc, o.out);
    (void)err;
    return kOk;
}

int cmd_profile(const ProfileOpts& o, std::ostream& out, std::ostream& err) {
    if (o.target.empty() == o.exec.empty()) throw UsageError("give exactly one of --target or --exec");

    GridMap grids;
    for (const auto& g : o.grids) {
        const auto eq = g.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--grid expects VAR=lo:hi:n, got '" + g + "'");
        const std::string var = g.substr(0, eq);
        if (grids.contains(var)) throw UsageError("duplicate --grid for '" + var + "'");
        try {
            grids[var] = parse_grid(std::string_view(g).substr(eq + 1));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }

    std::unique_ptr<Target> target;
    MeasureConfig cfg;
    BlendMode mode;
    try {
        if (!o.target.empty()) {
            target = make_builtin(o.target);
            if (o.defaults) grids.merge(default_grids(o.target));
        } else {
            if (o.defaults) throw UsageError("--defaults only applies to builtin targets");
            std::vector<std::string> vars;
            for (const auto& [k, v] : grids) vars.push_back(k);
            if (vars.empty()) throw UsageError("--exec needs at least one --grid");
            target = make_external(o.exec, vars);
        }
        cfg.repetitions = o.reps;
        cfg.warmup_runs = o.warmup;
        cfg.aggregator = parse_aggregator(o.aggregator);
        cfg.seed = o.seed ? *o.seed : env_seed().value_or(0);
        cfg.validate();
        mode = parse_blend_mode(o.mode);
        validate_grids(target->spec(), grids);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    RuntimeProfile profile = build_runtime_profile(*target, grids, cfg, mode);

    ProfileDocument doc;
    doc.kind = "profile";
    doc.config = {cfg.seed, cfg.repetitions, cfg.warmup_runs, cfg.aggregator, mode, grids};
    std::size_t low = 0;
    for (const auto& vp : profile.profiles) {
        for (const auto& s : vp.sweep.samples) low += s.below_resolution ? 1 : 0;
    }
    if (low) {
        doc.warnings.push_back(std::to_string(low) +
                               " sample(s) below 100x the CPU clock resolution");
        err << "warning: " << doc.warnings.back() << '\n';
    }

    out << "target: " << profile.target.name << " (seed " << cfg.seed << ")\n";
    for (const auto& vp : profile.profiles) {
        out << "variable " << vp.variable;
        for (const auto& [k, v] : vp.fixed_values) out << "  " << k << "=" << v;
        out << '\n';
        for (const auto& p : vp.sweep.series.points()) {
            out << "  " << fmt(p.x) << "  " << fmt(p.y) << '\n';
        }
        print_model(vp.model, out);
    }
    for (const auto& il : profile.interactions) {
        out << "interaction " << il.pair.first << "/" << il.pair.second << ": "
            << to_string(il.label) << " (evidence " << fmt(il.evidence) << ", threshold "
            << fmt(il.threshold) << ")\n";
    }
    doc.profile = std::move(profile);
    if (!o.out.empty()) write_document(doc, o.out);
    return kOk;
}

int cmd_classify(const ClassifyOpts& o, std::ostream& out, std::ostream&) {
    if (o.profile.empty() == o.input.empty()) throw UsageError("give exactly one of --profile or --input");
    std::vector<CandidateClass> candidates;
    try {
        candidates = o.candidates.empty() ? default_candidates() : parse_candidates(o.candidates);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    if (candidates.size() < 2) throw UsageError("--candidates needs at least two classes");

    if (!o.input.empty()) {
        const auto series = read_series(o.input);
        print_report(o.input, classify(series, candidates), out);
        return kOk;
    }

    ProfileDocument doc = read_document(o.profile);
    if (doc.profile) {
        auto pc = classify_profile(*doc.profile, candidates);
        for (const auto& [var, rep] : pc.per_variable) print_report("variable " + var, rep, out);
        out << "summary: " << pc.summary << '\n';
        doc.classification = std::move(pc);
    } else if (doc.approx) {
        auto rep = classify(doc.approx->series, candidates);
        print_report(doc.approx->source, rep, out);
        ProfileClassification pc;
        pc.summary = rep.winner().name;
        pc.per_variable.emplace("x", std::move(rep));
        doc.classification = std::move(pc);
    } else {
        throw Error(ErrorKind::ParseError, "document has neither a profile nor a series");
    }
    write_document(doc, o.profile);
    return kOk;
}

int cmd_eval(const EvalOpts& o, std::ostream& out, std::ostream& err) {
    const ProfileDocument doc = read_document(o.model);
    const PiecewisePoly* pw = nullptr;
    if (doc.profile) {
        if (o.var.empty()) {
            if (doc.profile->profiles.size() != 1) {
                throw UsageError("model has several variables; pick one with --var");
            }
            pw = &doc.profile->profiles.front().model;
        } else {
            const auto* vp = doc.profile->find(o.var);
            if (!vp) throw UsageError("model has no variable '" + o.var + "'");
            pw = &vp->model;
        }
    } else if (doc.approx && doc.approx->model) {
        pw = &*doc.approx->model;
    } else {
        throw Error(ErrorKind::ParseError, "document contains no model");
    }

    if (!o.derivative) {
        out << fmt(pw->evaluate(o.at)) << '\n';
        return kOk;
    }
    const auto d = pw->derivative_at(o.at);
    out << fmt(d.left) << ' ' << fmt(d.right) << '\n';
    if (std::abs(d.left - d.right) > 1e-9 * std::max({1.0, std::abs(d.left), std::abs(d.right)})) {
        err << "warning: model is not differentiable at x=" << fmt(o.at)
            << " (left and right derivatives differ)\n";
    }
    return kOk;
}

}  // namespace

std::vector<std::int64_t> parse_grid(std::string_view text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3 && parts.size() != 4) {
        throw Error(ErrorKind::InvalidArgument, "grid '" + std::string(text) + "' is not lo:hi:n[:log]");
    }
    const auto lo = parse_int<std::int64_t>(parts[0]);
    const auto hi = parse_int<std::int64_t>(parts[1]);
    const auto n = parse_int<int>(parts[2]);
    if (!lo || !hi || !n) {
        throw Error(ErrorKind::InvalidArgument, "grid '" + std::string(text) + "' has a non-integer field");
    }
    const bool geometric = parts.size() == 4;
    if (geometric && parts[3] != "log") {
        throw Error(ErrorKind::InvalidArgument, "unknown grid spacing '" + std::string(parts[3]) + "'");
    }
    if (*n < 3) throw Error(ErrorKind::GridTooSmall, "grid needs at least 3 points");
    if (*n % 2 == 0) throw Error(ErrorKind::EvenSeries, "grid needs an odd number of points");
    if (*lo < 0 || *lo >= *hi) throw Error(ErrorKind::InvalidArgument, "grid needs 0 <= lo < hi");
    if (geometric && *lo == 0) throw Error(ErrorKind::InvalidArgument, "log grid needs lo > 0");

    std::vector<std::int64_t> grid;
    for (int i = 0; i < *n; ++i) {
        const double t = static_cast<double>(i) / (*n - 1);
        const double v = geometric ? static_cast<double>(*lo) * std::pow(static_cast<double>(*hi) / *lo, t)
                                   : static_cast<double>(*lo) + t * static_cast<double>(*hi - *lo);
        grid.push_back(static_cast<std::int64_t>(std::llround(v)));
    }
    grid.front() = *lo;
    grid.back() = *hi;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= grid[i - 1]) {
            throw Error(ErrorKind::NonMonotonicX,
                        "grid '" + std::string(text) + "' repeats values after rounding");
        }
    }
    return grid;
}

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("QSEG_SEED");
    if (!s || !*s) return std::nullopt;
    const auto v = parse_int<std::uint64_t>(s);
    if (!v) throw Error(ErrorKind::InvalidArgument, std::string("QSEG_SEED is not an unsigned integer: ") + s);
    return v;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Segmented quadratic models of functions and measured runtimes", "qseg"};
    app.require_subcommand(1);
    app.fallthrough(false);

    const auto modes = "Blend mode: endpoint (default), paper or pure";

    ApproxOpts ao;
    auto* approx = app.add_subcommand("approx", "Fit a piecewise model to a series or named function");
    auto* a_in = approx->add_option("--input", ao.input, "CSV series with columns x,y");
    auto* a_fn = approx->add_option("--fn", ao.fn, "Named function: log2, cospix, exp2 or ratio");
    a_in->excludes(a_fn);
    approx->add_option("--from", ao.from, "Left end of the domain (with --fn)");
    approx->add_option("--to", ao.to, "Right end of the domain (with --fn)");
    approx->add_option("--segments", ao.segments, "Number of segments (with --fn)");
    approx->add_option("--spacing", ao.spacing, "Segment spacing: uniform or geometric (with --fn)");
    approx->add_option("--mode", ao.mode, modes);
    approx->add_option("--out", ao.out, "Write a JSON report here");
    approx->add_option("--plot", ao.plot, "Write dense plot data (CSV) here");

    ProfileOpts po;
    auto* profile = app.add_subcommand("profile", "Measure a target over argument grids and model it");
    auto* p_target = profile->add_option("--target", po.target,
                                         "Builtin target: binary-search, merge-sort, search-sort or custom");
    auto* p_exec = profile->add_option("--exec", po.exec,
                                       "External command, run as CMD --var NAME=VALUE ...");
    p_target->excludes(p_exec);
    profile->add_option("--grid", po.grids, "Grid VAR=lo:hi:n[:log] (n odd), once per variable");
    profile->add_option("--reps", po.reps, "Timed repetitions per point (>= 3)");
    profile->add_option("--warmup", po.warmup, "Untimed warmup runs per point (>= 1)");
    profile->add_option("--seed", po.seed, "Input-generation seed; defaults to $QSEG_SEED, then 0");
    profile->add_option("--aggregator", po.aggregator, "Repetition aggregator: median or mean");
    profile->add_option("--mode", po.mode, modes);
    profile->add_flag("--defaults", po.defaults, "Use the builtin default grid for variables without --grid");
    profile->add_option("--out", po.out, "Write the profile document here");

    ClassifyOpts co;
    auto* classify_cmd = app.add_subcommand("classify", "Rank growth classes against measured data");
    auto* c_prof = classify_cmd->add_option("--profile", co.profile,
                                            "Profile document; the classification is written back into it");
    auto* c_in = classify_cmd->add_option("--input", co.input, "CSV series with columns x,y");
    c_prof->excludes(c_in);
    classify_cmd->add_option("--candidates", co.candidates,
                             "Comma-separated classes (default: const,log,sqrt,linear,nlogn,quadratic,exp,loglog)");

    EvalOpts eo;
    auto* eval = app.add_subcommand("eval", "Evaluate a stored model");
    eval->add_option("--model", eo.model, "Profile or approx document")->required();
    eval->add_option("--at", eo.at, "Input value")->required();
    eval->add_option("--var", eo.var, "Variable whose model to use (profiles with several)");
    eval->add_flag("--derivative", eo.derivative, "Print left and right derivatives instead");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (approx->parsed()) return cmd_approx(ao, out, err);
        if (profile->parsed()) return cmd_profile(po, out, err);
        if (classify_cmd->parsed()) return cmd_classify(co, out, err);
        if (eval->parsed()) return cmd_eval(eo, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
    return kUsageError;
}

}  // namespace qseg::cli
