#include "qseg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "qseg/error.hpp"

namespace qseg {

namespace {

// 2^x overflows double past x ≈ 1023.
constexpr double kExpCap = 1000.0;
// Fits this close to exact are treated as tied and ordered by name.
constexpr double kExactFit = 1e-12;

double nlogn(double n) { return n * std::log2(n); }

}  // namespace

CandidateClass candidate(std::string_view name) {
    if (name == "const") return {"const", [](double) { return 1.0; }, std::nullopt};
    if (name == "log") return {"log", [](double n) { return std::log2(n); }, std::nullopt};
    if (name == "sqrt") return {"sqrt", [](double n) { return std::sqrt(n); }, std::nullopt};
    if (name == "linear") return {"linear", [](double n) { return n; }, std::nullopt};
    if (name == "nlogn") return {"nlogn", nlogn, std::nullopt};
    if (name == "quadratic") return {"quadratic", [](double n) { return n * n; }, std::nullopt};
    if (name == "exp") return {"exp", [](double n) { return std::exp2(n); }, kExpCap};
    if (name == "loglog") {
        return {"loglog", [](double n) { return std::log2(std::log2(n)); }, std::nullopt};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown candidate class '" + std::string(name) + "'");
}

std::vector<std::string> candidate_names() {
    return {"const", "log", "sqrt", "linear", "nlogn", "quadratic", "exp", "loglog"};
}

std::vector<CandidateClass> default_candidates() {
    std::vector<CandidateClass> out;
    for (const auto& n : candidate_names()) out.push_back(candidate(n));
    return out;
}

std::vector<CandidateClass> parse_candidates(std::string_view list) {
    std::vector<CandidateClass> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        std::string_view item = list.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            auto c = candidate(item);
            const bool dup = std::any_of(out.begin(), out.end(),
                                         [&](const CandidateClass& o) { return o.name == c.name; });
            if (!dup) out.push_back(std::move(c));
        }
        pos = comma + 1;
    }
    return out;
}

CandidateFit fit_class(const SampleSeries& series, const CandidateClass& cls) {
    if (series.size() < 2) {
        throw Error(ErrorKind::TooFewPoints, "fitting needs at least 2 samples");
    }
    CandidateFit fit;
    fit.name = cls.name;

    std::vector<double> gs, ys;
    std::size_t capped = 0, non_finite = 0;
    for (const auto& p : series.points()) {
        if (cls.max_x && p.x > *cls.max_x) {
            ++capped;
            continue;
        }
        const double g = cls.g(p.x);
        if (!std::isfinite(g)) {
            ++non_finite;
            continue;
        }
        gs.push_back(g);
        ys.push_back(p.y);
    }
    if (capped) {
        fit.warnings.push_back(std::to_string(capped) + " point(s) above x=" +
                               std::to_string(static_cast<long long>(*cls.max_x)) +
                               " excluded from '" + cls.name + "'");
    }
    if (non_finite) {
        fit.warnings.push_back(std::to_string(non_finite) + " point(s) where '" + cls.name +
                               "' is undefined excluded");
    }
    fit.points_used = gs.size();
    if (gs.size() < 2) {
        throw Error(ErrorKind::DegenerateDesign,
                    "class '" + cls.name + "' is defined at fewer than 2 sample points");
    }

    const double n = static_cast<double>(gs.size());
    const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / n;

    if (cls.name == "const") {
        fit.k = std::max(ybar, 0.0);
        fit.C = ybar - fit.k;
    } else {
        double scale = 0.0;
        for (double g : gs) scale = std::max(scale, std::abs(g));
        if (scale == 0.0) {
            throw Error(ErrorKind::DegenerateDesign, "class '" + cls.name + "' is zero on the grid");
        }
        for (double& g : gs) g /= scale;
        const double gbar = std::accumulate(gs.begin(), gs.end(), 0.0) / n;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            sxx += (gs[i] - gbar) * (gs[i] - gbar);
            sxy += (gs[i] - gbar) * (ys[i] - ybar);
        }
        if (sxx <= 1e-24 * n) {
            throw Error(ErrorKind::DegenerateDesign,
                        "class '" + cls.name + "' is constant over the grid");
        }
        const double ks = sxy / sxx;
        if (ks > 0.0) {
            fit.k = ks / scale;
            fit.C = ybar - ks * gbar;
        } else {
            fit.k = 0.0;
            fit.C = ybar;
        }
    }

    double ss = 0.0;
    for (const auto& p : series.points()) {
        if (cls.max_x && p.x > *cls.max_x) continue;
        const double g = cls.g(p.x);
        if (!std::isfinite(g)) continue;
        const double r = p.y - (fit.k * g + fit.C);
        ss += r * r;
    }
    fit.rmse = std::sqrt(ss / n);

    const auto ys_all = series.ys();
    const auto [lo, hi] = std::minmax_element(ys_all.begin(), ys_all.end());
    const double range = *hi - *lo;
    fit.normalized_rmse = range > 0.0 ? fit.rmse / range : fit.rmse;
    return fit;
}

ClassificationReport classify(const SampleSeries& series,
                              const std::vector<CandidateClass>& candidates) {
    if (candidates.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "classification needs at least 2 candidates");
    }
    ClassificationReport report;
    for (const auto& c : candidates) {
        try {
            report.ranked.push_back(fit_class(series, c));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateDesign) throw;
            CandidateFit f;
            f.name = c.name;
            f.rmse = std::numeric_limits<double>::infinity();
            f.normalized_rmse = std::numeric_limits<double>::infinity();
            f.warnings.push_back(e.what());
            report.ranked.push_back(std::move(f));
        }
    }
    // Fits that skipped samples only compete among themselves, after the
    // fits that explain every sample.
    const auto key = [&](const CandidateFit& f) {
        const bool partial = f.points_used < series.size();
        const double e = f.normalized_rmse < kExactFit ? 0.0 : f.normalized_rmse;
        return std::tuple(partial, e, std::string_view(f.name));
    };
    std::sort(report.ranked.begin(), report.ranked.end(),
              [&](const CandidateFit& a, const CandidateFit& b) { return key(a) < key(b); });

    const double w = report.ranked[0].normalized_rmse;
    const double r = report.ranked[1].normalized_rmse;
    report.margin = w > 0.0 ? r / w : std::numeric_limits<double>::infinity();
    return report;
}

std::string compose_summary(const std::vector<std::string>& variables,
                            const std::map<std::string, std::string>& winners,
                            const std::vector<InteractionLabel>& interactions) {
    if (variables.size() == 1) return winners.at(variables.front());

    std::vector<std::size_t> parent(variables.size());
    std::iota(parent.begin(), parent.end(), 0);
    const auto root = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    const auto index_of = [&](const std::string& v) {
        return static_cast<std::size_t>(std::find(variables.begin(), variables.end(), v) -
                                        variables.begin());
    };
    for (const auto& il : interactions) {
        if (il.label != Interaction::Composite) continue;
        const std::size_t a = index_of(il.pair.first);
        const std::size_t b = index_of(il.pair.second);
        if (a >= variables.size() || b >= variables.size()) continue;
        const std::size_t ra = root(a), rb = root(b);
        parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    std::string out;
    std::vector<bool> done(variables.size(), false);
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (done[i]) continue;
        if (!out.empty()) out += " + ";
        bool first = true;
        for (std::size_t j = i; j < variables.size(); ++j) {
            if (done[j] || root(j) != root(i)) continue;
            done[j] = true;
            if (!first) out += " · ";
            first = false;
            out += winners.at(variables[j]) + "(" + variables[j] + ")";
        }
    }
    return out;
}

ProfileClassification classify_profile(const RuntimeProfile& profile,
                                       const std::vector<CandidateClass>& candidates) {
    ProfileClassification out;
    std::vector<std::string> order;
    std::map<std::string, std::string> winners;
    for (const auto& vp : profile.profiles) {
        auto report = classify(vp.sweep.series, candidates);
        winners[vp.variable] = report.winner().name;
        order.push_back(vp.variable);
        out.per_variable.emplace(vp.variable, std::move(report));
    }
    if (order.empty()) {
        throw Error(ErrorKind::InvalidArgument, "profile has no variable sweeps");
    }
    out.summary = compose_summary(order, winners, profile.interactions);
    return out;
}

}  // namespace qseg
