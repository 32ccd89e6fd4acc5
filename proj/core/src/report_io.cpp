#include "qseg/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <json.hpp>

#include "qseg/error.hpp"

namespace qseg {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Non-finite doubles become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double num_or_inf(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
    return *it;
}

json series_json(const SampleSeries& s) {
    json pts = json::array();
    for (const auto& p : s.points()) pts.push_back(json::array({p.x, p.y}));
    return {{"label", s.label()}, {"points", pts}};
}

SampleSeries series_from(const json& j) {
    std::vector<SamplePoint> pts;
    for (const auto& p : require(j, "points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return SampleSeries(std::move(pts), get_or<std::string>(j, "label", ""));
}

json model_json(const PiecewisePoly& pw) {
    json segs = json::array();
    for (const auto& s : pw.segments()) {
        const auto& n = s.node_xs();
        segs.push_back({{"a", s.a()},
                        {"b", s.b()},
                        {"c", s.c()},
                        {"lo", s.lo()},
                        {"hi", s.hi()},
                        {"nodes", json::array({n[0], n[1], n[2]})},
                        {"mode", to_string(s.mode())}});
    }
    return {{"mode", to_string(pw.mode())}, {"segments", segs}};
}

PiecewisePoly model_from(const json& j) {
    const BlendMode mode = parse_blend_mode(require(j, "mode").get<std::string>());
    std::vector<QuadraticSegment> segs;
    for (const auto& s : require(j, "segments")) {
        const auto& n = require(s, "nodes");
        segs.emplace_back(
            Quadratic{require(s, "a").get<double>(), require(s, "b").get<double>(),
                      require(s, "c").get<double>()},
            std::array<double, 3>{n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()},
            parse_blend_mode(get_or<std::string>(s, "mode", std::string(to_string(mode)))));
    }
    if (segs.empty()) throw Error(ErrorKind::ParseError, "model has no segments");
    return PiecewisePoly(std::move(segs), mode);
}

json args_json(const ArgMap& a) {
    json j = json::object();
    for (const auto& [k, v] : a) j[k] = v;
    return j;
}

ArgMap args_from(const json& j) {
    ArgMap a;
    for (const auto& [k, v] : j.items()) a[k] = v.get<std::int64_t>();
    return a;
}

json grids_json(const GridMap& g) {
    json j = json::object();
    for (const auto& [k, v] : g) j[k] = v;
    return j;
}

GridMap grids_from(const json& j) {
    GridMap g;
    for (const auto& [k, v] : j.items()) g[k] = v.get<std::vector<std::int64_t>>();
    return g;
}

json sweep_json(const SweepResult& s) {
    json samples = json::array();
    for (const auto& t : s.samples) {
        samples.push_back({{"args", args_json(t.args)},
                           {"cpu_seconds", num(t.cpu_seconds)},
                           {"dispersion", num(t.dispersion)},
                           {"clock", to_string(t.clock)},
                           {"below_resolution", t.below_resolution}});
    }
    return {{"swept_variable", s.swept_variable},
            {"fixed_values", args_json(s.fixed_values)},
            {"samples", samples},
            {"series", series_json(s.series)}};
}

SweepResult sweep_from(const json& j) {
    SweepResult s;
    s.swept_variable = require(j, "swept_variable").get<std::string>();
    s.fixed_values = args_from(get_or<json>(j, "fixed_values", json::object()));
    for (const auto& t : get_or<json>(j, "samples", json::array())) {
        TimingSample ts;
        ts.args = args_from(require(t, "args"));
        ts.cpu_seconds = num_or_inf(require(t, "cpu_seconds"));
        ts.dispersion = num_or_inf(require(t, "dispersion"));
        ts.clock = parse_clock_kind(require(t, "clock").get<std::string>());
        ts.below_resolution = get_or<bool>(t, "below_resolution", false);
        s.samples.push_back(std::move(ts));
    }
    s.series = series_from(require(j, "series"));
    return s;
}

json target_json(const TargetSpec& t) {
    json vars = json::array();
    for (const auto& v : t.variables) vars.push_back({{"name", v.name}, {"allows_zero", v.allows_zero}});
    return {{"kind", to_string(t.kind)}, {"name", t.name}, {"command", t.command}, {"variables", vars}};
}

TargetSpec target_from(const json& j) {
    TargetSpec t;
    t.kind = parse_target_kind(require(j, "kind").get<std::string>());
    t.name = require(j, "name").get<std::string>();
    t.command = get_or<std::string>(j, "command", "");
    for (const auto& v : require(j, "variables")) {
        t.variables.push_back({require(v, "name").get<std::string>(), get_or<bool>(v, "allows_zero", true)});
    }
    return t;
}

json interaction_json(const InteractionLabel& il) {
    json offsets = json::array();
    for (double o : il.offsets) offsets.push_back(num(o));
    return {{"pair", json::array({il.pair.first, il.pair.second})},
            {"label", to_string(il.label)},
            {"evidence", num(il.evidence)},
            {"threshold", num(il.threshold)},
            {"probe_values", il.probe_values},
            {"offsets", offsets}};
}

InteractionLabel interaction_from(const json& j) {
    InteractionLabel il;
    const auto& pair = require(j, "pair");
    il.pair = {pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
    il.label = parse_interaction(require(j, "label").get<std::string>());
    il.evidence = num_or_inf(require(j, "evidence"));
    il.threshold = num_or_inf(require(j, "threshold"));
    il.probe_values = get_or<std::vector<std::int64_t>>(j, "probe_values", {});
    for (const auto& o : get_or<json>(j, "offsets", json::array())) il.offsets.push_back(num_or_inf(o));
    return il;
}

json profile_json(const RuntimeProfile& p) {
    json profiles = json::array();
    for (const auto& vp : p.profiles) {
        profiles.push_back({{"variable", vp.variable},
                            {"fixed_values", args_json(vp.fixed_values)},
                            {"sweep", sweep_json(vp.sweep)},
                            {"model", model_json(vp.model)}});
    }
    json inter = json::array();
    for (const auto& il : p.interactions) inter.push_back(interaction_json(il));
    return {{"target", target_json(p.target)},
            {"profiles", profiles},
            {"interactions", inter},
            {"baseline_constants", args_json(p.baseline_constants)},
            {"representative_constants", args_json(p.representative_constants)},
            {"k_hint", p.k_hint ? num(*p.k_hint) : json(nullptr)}};
}

RuntimeProfile profile_from(const json& j) {
    RuntimeProfile p;
    p.target = target_from(require(j, "target"));
    for (const auto& vp : require(j, "profiles")) {
        p.profiles.push_back({require(vp, "variable").get<std::string>(),
                              args_from(get_or<json>(vp, "fixed_values", json::object())),
                              sweep_from(require(vp, "sweep")), model_from(require(vp, "model"))});
    }
    for (const auto& il : get_or<json>(j, "interactions", json::array())) {
        p.interactions.push_back(interaction_from(il));
    }
    p.baseline_constants = args_from(get_or<json>(j, "baseline_constants", json::object()));
    p.representative_constants = args_from(get_or<json>(j, "representative_constants", json::object()));
    if (auto it = j.find("k_hint"); it != j.end() && !it->is_null()) p.k_hint = it->get<double>();
    return p;
}

json accuracy_json(const AccuracyReport& r) {
    json segs = json::array();
    for (const auto& s : r.per_segment) {
        segs.push_back({{"lo", s.lo},
                        {"hi", s.hi},
                        {"integral_reference", num(s.integral_reference)},
                        {"integral_model", num(s.integral_model)},
                        {"ratio", s.ratio ? num(*s.ratio) : json(nullptr)}});
    }
    return {{"per_segment", segs},
            {"total_reference", num(r.total_reference)},
            {"total_model", num(r.total_model)},
            {"A", num(r.aggregate_A)}};
}

AccuracyReport accuracy_from(const json& j) {
    AccuracyReport r;
    for (const auto& s : require(j, "per_segment")) {
        SegmentAccuracy sa;
        sa.lo = require(s, "lo").get<double>();
        sa.hi = require(s, "hi").get<double>();
        sa.integral_reference = num_or_inf(require(s, "integral_reference"));
        sa.integral_model = num_or_inf(require(s, "integral_model"));
        if (auto it = s.find("ratio"); it != s.end() && !it->is_null()) sa.ratio = it->get<double>();
        r.per_segment.push_back(sa);
    }
    r.total_reference = num_or_inf(require(j, "total_reference"));
    r.total_model = num_or_inf(require(j, "total_model"));
    r.aggregate_A = num_or_inf(require(j, "A"));
    return r;
}

json approx_json(const ApproxResult& a) {
    json j = {{"source", a.source}, {"series", series_json(a.series)}};
    j["model"] = a.model ? model_json(*a.model) : json(nullptr);
    j["accuracy"] = a.accuracy ? accuracy_json(*a.accuracy) : json(nullptr);
    return j;
}

ApproxResult approx_from(const json& j) {
    ApproxResult a;
    a.source = get_or<std::string>(j, "source", "");
    a.series = series_from(require(j, "series"));
    if (auto it = j.find("model"); it != j.end() && !it->is_null()) a.model = model_from(*it);
    if (auto it = j.find("accuracy"); it != j.end() && !it->is_null()) a.accuracy = accuracy_from(*it);
    return a;
}

json fit_json(const CandidateFit& f) {
    return {{"name", f.name},
            {"k", num(f.k)},
            {"C", num(f.C)},
            {"rmse", num(f.rmse)},
            {"normalized_rmse", num(f.normalized_rmse)},
            {"points_used", f.points_used},
            {"warnings", f.warnings}};
}

CandidateFit fit_from(const json& j) {
    CandidateFit f;
    f.name = require(j, "name").get<std::string>();
    f.k = num_or_inf(require(j, "k"));
    f.C = num_or_inf(require(j, "C"));
    f.rmse = num_or_inf(require(j, "rmse"));
    f.normalized_rmse = num_or_inf(require(j, "normalized_rmse"));
    f.points_used = get_or<std::size_t>(j, "points_used", 0);
    f.warnings = get_or<std::vector<std::string>>(j, "warnings", {});
    return f;
}

json classification_json(const ProfileClassification& c) {
    json vars = json::object();
    for (const auto& [name, rep] : c.per_variable) {
        json ranked = json::array();
        for (const auto& f : rep.ranked) ranked.push_back(fit_json(f));
        vars[name] = {{"winner", rep.ranked.empty() ? "" : rep.winner().name},
                      {"margin", num(rep.margin)},
                      {"ranked", ranked}};
    }
    return {{"summary", c.summary}, {"variables", vars}};
}

ProfileClassification classification_from(const json& j) {
    ProfileClassification c;
    c.summary = get_or<std::string>(j, "summary", "");
    for (const auto& [name, rep] : require(j, "variables").items()) {
        ClassificationReport r;
        for (const auto& f : require(rep, "ranked")) r.ranked.push_back(fit_from(f));
        r.margin = num_or_inf(require(rep, "margin"));
        c.per_variable.emplace(name, std::move(r));
    }
    return c;
}

void strip_keys(json& j, const std::vector<std::string>& keys) {
    if (j.is_object()) {
        for (const auto& k : keys) j.erase(k);
        for (auto& [k, v] : j.items()) strip_keys(v, keys);
    } else if (j.is_array()) {
        for (auto& v : j) strip_keys(v, keys);
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

SampleSeries parse_series_csv(std::string_view text, std::string label) {
    std::vector<SamplePoint> pts;
    std::size_t line_no = 0;
    bool seen_row = false;
    while (!text.empty()) {
        const std::size_t nl = std::min(text.find('\n'), text.size());
        std::string_view line = trim(text.substr(0, nl));
        text.remove_prefix(std::min(nl + 1, text.size()));
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            parse_fail(line_no, "expected two comma-separated columns");
        }
        const auto x = parse_number(line.substr(0, comma));
        const auto y = parse_number(line.substr(comma + 1));
        if (!x || !y) {
            if (!seen_row && trim(line.substr(0, comma)) == "x" && trim(line.substr(comma + 1)) == "y") {
                seen_row = true;
                continue;
            }
            parse_fail(line_no, "not a number: '" + std::string(line) + "'");
        }
        seen_row = true;
        if (!std::isfinite(*x) || !std::isfinite(*y)) parse_fail(line_no, "value is not finite");
        if (!pts.empty() && *x <= pts.back().x) {
            throw Error(ErrorKind::NonMonotonicX, "line " + std::to_string(line_no) +
                                                      ": x must be strictly increasing");
        }
        pts.push_back({*x, *y});
    }
    return SampleSeries(std::move(pts), std::move(label));
}

std::string format_series_csv(const SampleSeries& series) {
    std::string out = "x,y\n";
    for (const auto& p : series.points()) {
        out += format_double(p.x);
        out += ',';
        out += format_double(p.y);
        out += '\n';
    }
    return out;
}

SampleSeries read_series(const std::filesystem::path& path) {
    return parse_series_csv(read_text(path), path.stem().string());
}

void write_series(const SampleSeries& series, const std::filesystem::path& path) {
    write_text(path, format_series_csv(series));
}

std::vector<PlotRow> plot_rows(const PiecewisePoly& pw, const ReferenceFn* ref) {
    if (ref && (pw.lo() < ref->lo || pw.hi() > ref->hi)) {
        throw Error(ErrorKind::OutOfDomain, "reference '" + ref->name + "' does not cover the model domain");
    }
    std::vector<PlotRow> rows;
    rows.reserve(pw.size() * (kPlotPointsPerSegment + 2) + 1);
    const auto row = [&](double x, std::size_t i, bool knot) {
        PlotRow r{x, pw[i](x), std::nullopt, i, knot};
        if (ref) r.G = (*ref)(x);
        rows.push_back(r);
    };
    for (std::size_t i = 0; i < pw.size(); ++i) {
        const auto& seg = pw[i];
        if (i == 0) row(seg.lo(), 0, false);
        const double h = seg.hi() - seg.lo();
        for (std::size_t j = 0; j < kPlotPointsPerSegment; ++j) {
            row(seg.lo() + h * (static_cast<double>(j) + 0.5) / kPlotPointsPerSegment, i, false);
        }
        if (i + 1 == pw.size()) {
            row(seg.hi(), i, false);
        } else {
            row(seg.hi(), i, true);
            const double left = seg(seg.hi());
            const double right = pw[i + 1](seg.hi());
            if (std::abs(left - right) > 1e-9 * std::max({1.0, std::abs(left), std::abs(right)})) {
                row(seg.hi(), i + 1, true);
            }
        }
    }
    return rows;
}

std::string format_plot_csv(const std::vector<PlotRow>& rows) {
    const bool with_g = !rows.empty() && rows.front().G.has_value();
    std::string out = with_g ? "x,F,G,segment_index,knot\n" : "x,F,segment_index,knot\n";
    for (const auto& r : rows) {
        out += format_double(r.x) + ',' + format_double(r.F) + ',';
        if (with_g) out += format_double(r.G.value_or(std::numeric_limits<double>::quiet_NaN())) + ',';
        out += std::to_string(r.segment_index) + ',' + (r.knot ? "1" : "0") + '\n';
    }
    return out;
}

void emit_plot_data(const PiecewisePoly& pw, const ReferenceFn* ref,
                    const std::filesystem::path& path) {
    write_text(path, format_plot_csv(plot_rows(pw, ref)));
}

std::string to_json_text(const ProfileDocument& doc) {
    json j;
    j["format_version"] = doc.format_version;
    j["kind"] = doc.kind;
    j["config"] = {{"seed", doc.config.seed ? json(*doc.config.seed) : json(nullptr)},
                   {"repetitions", doc.config.repetitions},
                   {"warmup_runs", doc.config.warmup_runs},
                   {"aggregator", to_string(doc.config.aggregator)},
                   {"mode", to_string(doc.config.mode)},
                   {"grids", grids_json(doc.config.grids)}};
    j["profile"] = doc.profile ? profile_json(*doc.profile) : json(nullptr);
    j["approx"] = doc.approx ? approx_json(*doc.approx) : json(nullptr);
    j["classification"] = doc.classification ? classification_json(*doc.classification) : json(nullptr);
    j["warnings"] = doc.warnings;
    return j.dump(2) + "\n";
}

ProfileDocument parse_document(std::string_view text) {
    const json j = parse_json(text);
    if (!j.is_object()) throw Error(ErrorKind::ParseError, "document is not a JSON object");
    try {
        ProfileDocument doc;
        doc.format_version = require(j, "format_version").get<std::string>();
        int major = 0;
        const auto& v = doc.format_version;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), major);
        if (ec != std::errc() || (ptr != v.data() + v.size() && *ptr != '.')) {
            throw Error(ErrorKind::ParseError, "bad format_version '" + v + "'");
        }
        if (major > 1) {
            throw Error(ErrorKind::UnsupportedVersion,
                        "document version " + v + " is newer than " + std::string(kFormatVersion));
        }
        doc.kind = require(j, "kind").get<std::string>();
        if (auto it = j.find("config"); it != j.end() && it->is_object()) {
            const auto& c = *it;
            if (auto s = c.find("seed"); s != c.end() && !s->is_null()) doc.config.seed = s->get<std::uint64_t>();
            doc.config.repetitions = get_or<int>(c, "repetitions", 0);
            doc.config.warmup_runs = get_or<int>(c, "warmup_runs", 0);
            doc.config.aggregator = parse_aggregator(get_or<std::string>(c, "aggregator", "median"));
            doc.config.mode = parse_blend_mode(get_or<std::string>(c, "mode", "endpoint"));
            doc.config.grids = grids_from(get_or<json>(c, "grids", json::object()));
        }
        if (auto it = j.find("profile"); it != j.end() && !it->is_null()) doc.profile = profile_from(*it);
        if (auto it = j.find("approx"); it != j.end() && !it->is_null()) doc.approx = approx_from(*it);
        if (auto it = j.find("classification"); it != j.end() && !it->is_null()) {
            doc.classification = classification_from(*it);
        }
        doc.warnings = get_or<std::vector<std::string>>(j, "warnings", {});
        return doc;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
    }
}

ProfileDocument read_document(const std::filesystem::path& path) {
    return parse_document(read_text(path));
}

void write_document(const ProfileDocument& doc, const std::filesystem::path& path) {
    write_text(path, to_json_text(doc));
}

const std::vector<std::string>& timing_fields() {
    static const std::vector<std::string> fields{
        "cpu_seconds", "dispersion", "below_resolution", "series",   "model",
        "evidence",    "threshold",  "offsets",          "label",    "representative_constants",
        "fixed_values", "args",      "classification",   "k_hint",   "warnings"};
    return fields;
}

std::string strip_timing_fields(std::string_view json_text) {
    json j = parse_json(json_text);
    strip_keys(j, timing_fields());
    return j.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    auto tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error(ErrorKind::IoError, "write to '" + path.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    }
}

}  // namespace qseg
