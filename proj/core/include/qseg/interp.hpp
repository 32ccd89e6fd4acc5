#pragma once

// Segmented quadratic models: each span of three consecutive samples becomes
// a quadratic that blends the 3-point Lagrange interpolant with a secant, and
// the spans are joined at shared nodes into a piecewise model.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qseg {

struct SamplePoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

/// Ordered samples with strictly increasing, finite x and finite y.
///
/// Odd length is a requirement of the piecewise builder, not of the series
/// itself: files with an even row count still load and fail at model-build
/// time with EvenSeries.
class SampleSeries {
public:
    SampleSeries() = default;
    explicit SampleSeries(std::vector<SamplePoint> points, std::string label = {});

    static SampleSeries from_xy(std::span<const double> xs, std::span<const double> ys,
                                std::string label = {});

    std::span<const SamplePoint> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const SamplePoint& operator[](std::size_t i) const { return points_[i]; }
    const SamplePoint& front() const { return points_.front(); }
    const SamplePoint& back() const { return points_.back(); }

    const std::string& label() const noexcept { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

    std::vector<double> xs() const;
    std::vector<double> ys() const;

    friend bool operator==(const SampleSeries&, const SampleSeries&) = default;

private:
    std::vector<SamplePoint> points_;
    std::string label_;
};

/// How a 3-node span mixes its Lagrange quadratic with a secant line.
enum class BlendMode {
    PureLagrange,    ///< no blending; the interpolating quadratic itself
    PaperSecant,     ///< half Lagrange, half secant through the 2nd and 3rd nodes
    EndpointSecant,  ///< half Lagrange, half secant through the 1st and 3rd nodes
};

std::string_view to_string(BlendMode mode) noexcept;
/// Accepts "pure", "paper", "endpoint" and the enumerator names.
BlendMode parse_blend_mode(std::string_view text);

struct LinearFn {
    double slope = 0.0;
    double intercept = 0.0;

    double operator()(double x) const noexcept { return slope * x + intercept; }
};

/// a·x² + b·x + c
struct Quadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double x) const noexcept { return (a * x + b) * x + c; }
    double slope(double x) const noexcept { return 2.0 * a * x + b; }

    friend bool operator==(const Quadratic&, const Quadratic&) = default;
};

/// Dense polynomial, coefficients in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    std::span<const double> coeffs() const noexcept { return coeffs_; }
    /// Degree after trimming exact zero leading terms; the zero polynomial has degree 0.
    std::size_t degree() const noexcept;
    double operator()(double x) const noexcept;

private:
    std::vector<double> coeffs_;
};

class QuadraticSegment {
public:
    /// Domain is [nodes[0], nodes[2]]; nodes must be strictly increasing.
    QuadraticSegment(Quadratic coeffs, std::array<double, 3> nodes, BlendMode mode);

    const Quadratic& coeffs() const noexcept { return coeffs_; }
    double a() const noexcept { return coeffs_.a; }
    double b() const noexcept { return coeffs_.b; }
    double c() const noexcept { return coeffs_.c; }
    double lo() const noexcept { return nodes_[0]; }
    double hi() const noexcept { return nodes_[2]; }
    double mid() const noexcept { return 0.5 * (nodes_[0] + nodes_[2]); }
    const std::array<double, 3>& node_xs() const noexcept { return nodes_; }
    BlendMode mode() const noexcept { return mode_; }

    double operator()(double x) const noexcept { return coeffs_(x); }
    double slope(double x) const noexcept { return coeffs_.slope(x); }
    /// Closed-form integral over [u, v], expanded about the segment midpoint.
    double integrate(double u, double v) const noexcept;

    friend bool operator==(const QuadraticSegment&, const QuadraticSegment&) = default;

private:
    Quadratic coeffs_;
    std::array<double, 3> nodes_;
    BlendMode mode_;
};

enum class Concavity { Upward, Downward, Linear };

std::string_view to_string(Concavity c) noexcept;

struct OneSidedDerivative {
    double left = 0.0;
    double right = 0.0;
};

/// Contiguous run of segments, each sharing its last node with the next
/// segment's first node.
class PiecewisePoly {
public:
    PiecewisePoly(std::vector<QuadraticSegment> segments, BlendMode mode);

    std::span<const QuadraticSegment> segments() const noexcept { return segments_; }
    std::size_t size() const noexcept { return segments_.size(); }
    const QuadraticSegment& operator[](std::size_t i) const { return segments_[i]; }
    BlendMode mode() const noexcept { return mode_; }
    double lo() const noexcept { return segments_.front().lo(); }
    double hi() const noexcept { return segments_.back().hi(); }
    bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }

    /// Index of the segment owning x. A shared knot belongs to the left segment.
    std::size_t segment_index(double x) const;

    double evaluate(double x) const;
    double operator()(double x) const { return evaluate(x); }

    /// One-sided derivatives. Inside a segment both equal 2a·x + b; at a knot
    /// they come from the two adjacent segments and generally differ.
    OneSidedDerivative derivative_at(double x) const;

    /// Exact integral over [a, b], which must lie inside the domain.
    double integral(double a, double b) const;

    friend bool operator==(const PiecewisePoly&, const PiecewisePoly&) = default;

private:
    std::vector<QuadraticSegment> segments_;
    BlendMode mode_;
};

enum class EvenPolicy { Reject, DropLast };

LinearFn secant_line(SamplePoint p, SamplePoint q);

Quadratic lagrange_quadratic(SamplePoint p0, SamplePoint p1, SamplePoint p2);

/// Largest node count accepted by lagrange_general.
inline constexpr std::size_t kMaxLagrangeNodes = 12;

/// Interpolating polynomial of degree < n through n points, expanded from the
/// Lagrange basis products.
Polynomial lagrange_general(std::span<const SamplePoint> points);

QuadraticSegment build_segment(SamplePoint p0, SamplePoint p1, SamplePoint p2,
                               BlendMode mode = BlendMode::EndpointSecant);

/// Non-overlapping node triples 0-1-2, 2-3-4, ... sharing their endpoints.
PiecewisePoly build_piecewise(const SampleSeries& series,
                              BlendMode mode = BlendMode::EndpointSecant,
                              EvenPolicy even = EvenPolicy::Reject);

double segment_average(const QuadraticSegment& seg) noexcept;

/// |a| at or below this counts as a straight segment: 1e-12·max(|b|, |c|).
double linear_tolerance(const Quadratic& q) noexcept;

Concavity concavity(const QuadraticSegment& seg) noexcept;
Concavity concavity(const QuadraticSegment& seg, double tolerance) noexcept;

/// Input in (lo, hi) at which the segment equals its own average value.
/// Picks the smaller root when both qualify and the midpoint for straight
/// segments.
double representative_input(const QuadraticSegment& seg);

/// Same idea over a whole model: the smallest input at which the model
/// reaches its domain-wide average value.
double representative_input(const PiecewisePoly& pw);

/// Coefficients of the next segment under node doubling for log2-type data:
/// (a/4, b/2, c + 1).
Quadratic self_similar_next(const Quadratic& q) noexcept;
inline Quadratic self_similar_next(const QuadraticSegment& seg) noexcept {
    return self_similar_next(seg.coeffs());
}

enum class Spacing { Uniform, Geometric };

std::string_view to_string(Spacing s) noexcept;
Spacing parse_spacing(std::string_view text);

/// Segment boundaries from `from` to `to` (inclusive), `segments` + 1 values.
std::vector<double> segment_edges(double from, double to, std::size_t segments, Spacing spacing);

/// Samples f at every edge plus the arithmetic midpoint of each pair of
/// consecutive edges, giving 2·(edges−1)+1 points.
SampleSeries sample_with_midpoints(const std::function<double(double)>& f,
                                   std::span<const double> edges, std::string label = {});

}  // namespace qseg
