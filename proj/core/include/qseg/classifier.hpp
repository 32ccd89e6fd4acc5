#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qseg/interp.hpp"
#include "qseg/profiler.hpp"

namespace qseg {

/// A growth function g(n) whose scaled, shifted form k·g(n) + C is fitted to timings.
struct CandidateClass {
    std::string name;
    std::function<double(double)> g;
    /// Points with x above this are left out of the fit (overflow guard).
    std::optional<double> max_x;
};

/// const, log, sqrt, linear, nlogn, quadratic, exp, loglog
CandidateClass candidate(std::string_view name);
std::vector<std::string> candidate_names();
std::vector<CandidateClass> default_candidates();
/// Parses a comma-separated list of candidate names.
std::vector<CandidateClass> parse_candidates(std::string_view list);

struct CandidateFit {
    std::string name;
    double k = 0.0;
    double C = 0.0;
    double rmse = 0.0;
    /// rmse / range(y); rmse itself when y is constant.
    double normalized_rmse = 0.0;
    std::size_t points_used = 0;
    std::vector<std::string> warnings;
};

/// Least squares y ≈ k·g(x) + C with k clamped to ≥ 0.
CandidateFit fit_class(const SampleSeries& series, const CandidateClass& cls);

struct ClassificationReport {
    /// Ascending normalized_rmse, ties broken by name.
    std::vector<CandidateFit> ranked;
    /// Runner-up nrmse over winner nrmse; infinite when the winner is exact.
    double margin = 0.0;

    const CandidateFit& winner() const { return ranked.front(); }
};

ClassificationReport classify(const SampleSeries& series,
                              const std::vector<CandidateClass>& candidates);

struct ProfileClassification {
    std::map<std::string, ClassificationReport> per_variable;
    std::string summary;
};

/// Joins per-variable winners, "+" between additive groups and " · " inside
/// composite ones, e.g. "log(x) + linear(b)".
std::string compose_summary(const std::vector<std::string>& variables,
                            const std::map<std::string, std::string>& winners,
                            const std::vector<InteractionLabel>& interactions);

ProfileClassification classify_profile(const RuntimeProfile& profile,
                                       const std::vector<CandidateClass>& candidates);

}  // namespace qseg
