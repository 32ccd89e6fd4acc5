#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qseg/accuracy.hpp"
#include "qseg/classifier.hpp"
#include "qseg/interp.hpp"
#include "qseg/profiler.hpp"

namespace qseg {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// CSV with an optional `x,y` header line. Blank lines and lines starting
/// with '#' are skipped. Errors carry the 1-based line number.
SampleSeries parse_series_csv(std::string_view text, std::string label = {});
std::string format_series_csv(const SampleSeries& series);

SampleSeries read_series(const std::filesystem::path& path);
void write_series(const SampleSeries& series, const std::filesystem::path& path);

struct PlotRow {
    double x = 0.0;
    double F = 0.0;
    std::optional<double> G;
    std::size_t segment_index = 0;
    bool knot = false;
};

/// Evaluation points per segment in plot output.
inline constexpr std::size_t kPlotPointsPerSegment = 200;

/// Domain endpoints, 200 interior points per segment and one row per interior
/// knot (two when the adjacent segments disagree there, one per side).
std::vector<PlotRow> plot_rows(const PiecewisePoly& pw, const ReferenceFn* ref = nullptr);
std::string format_plot_csv(const std::vector<PlotRow>& rows);
void emit_plot_data(const PiecewisePoly& pw, const ReferenceFn* ref,
                    const std::filesystem::path& path);

inline constexpr std::string_view kFormatVersion = "1.0";

struct DocumentConfig {
    std::optional<std::uint64_t> seed;
    int repetitions = 0;
    int warmup_runs = 0;
    Aggregator aggregator = Aggregator::Median;
    BlendMode mode = BlendMode::EndpointSecant;
    GridMap grids;
};

/// Result of fitting a piecewise model to a sample series or named function.
struct ApproxResult {
    std::string source;  ///< function name or input path
    SampleSeries series;
    std::optional<PiecewisePoly> model;
    std::optional<AccuracyReport> accuracy;
};

struct ProfileDocument {
    std::string format_version{kFormatVersion};
    std::string kind;  ///< "profile" or "approx"
    DocumentConfig config;
    std::optional<RuntimeProfile> profile;
    std::optional<ApproxResult> approx;
    std::optional<ProfileClassification> classification;
    std::vector<std::string> warnings;
};

/// Pretty-printed JSON with sorted keys; serializing a parsed document
/// reproduces the input bytes.
std::string to_json_text(const ProfileDocument& doc);
/// Unknown fields are ignored. Throws UnsupportedVersion for a newer major version.
ProfileDocument parse_document(std::string_view text);

ProfileDocument read_document(const std::filesystem::path& path);
void write_document(const ProfileDocument& doc, const std::filesystem::path& path);

/// Keys whose values depend on measured time. Dropping them leaves the part
/// of a profile document that must be identical across reruns with the same
/// flags and seed.
const std::vector<std::string>& timing_fields();
/// Removes every key listed in timing_fields() at any depth of a JSON document.
std::string strip_timing_fields(std::string_view json_text);

/// Whole file contents; IoError when unreadable.
std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary file in the same directory, then renames.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace qseg
