#include "qseg/interp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qseg/error.hpp"

namespace qseg {

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_distinct(double a, double b) {
    if (a == b) {
        throw Error(ErrorKind::DegenerateNodes, "repeated node x = " + fmt_num(a));
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SampleSeries

SampleSeries::SampleSeries(std::vector<SamplePoint> points, std::string label)
    : points_(std::move(points)), label_(std::move(label)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw Error(ErrorKind::NonFiniteValue, "sample " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(points_[i - 1].x < p.x)) {
            throw Error(ErrorKind::NonMonotonicX,
                        "x must be strictly increasing (sample " + std::to_string(i) +
                            ", x = " + fmt_num(p.x) + ")");
        }
    }
}

SampleSeries SampleSeries::from_xy(std::span<const double> xs, std::span<const double> ys,
                                   std::string label) {
    if (xs.size() != ys.size()) {
        throw Error(ErrorKind::InvalidArgument, "x and y lengths differ");
    }
    std::vector<SamplePoint> pts(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) pts[i] = {xs[i], ys[i]};
    return SampleSeries(std::move(pts), std::move(label));
}

std::vector<double> SampleSeries::xs() const {
    std::vector<double> out(points_.size());
    std::transform(points_.begin(), points_.end(), out.begin(), [](const auto& p) { return p.x; });
    return out;
}

std::vector<double> SampleSeries::ys() const {
    std::vector<double> out(points_.size());
    std::transform(points_.begin(), points_.end(), out.begin(), [](const auto& p) { return p.y; });
    return out;
}

// ---------------------------------------------------------------------------
// enums

std::string_view to_string(BlendMode mode) noexcept {
    switch (mode) {
    case BlendMode::PureLagrange: return "pure";
    case BlendMode::PaperSecant: return "paper";
    case BlendMode::EndpointSecant: return "endpoint";
    }
    return "endpoint";
}

BlendMode parse_blend_mode(std::string_view text) {
    if (text == "pure" || text == "PureLagrange") return BlendMode::PureLagrange;
    if (text == "paper" || text == "PaperSecant") return BlendMode::PaperSecant;
    if (text == "endpoint" || text == "EndpointSecant") return BlendMode::EndpointSecant;
    throw Error(ErrorKind::InvalidArgument, "unknown blend mode '" + std::string(text) + "'");
}

std::string_view to_string(Concavity c) noexcept {
    switch (c) {
    case Concavity::Upward: return "upward";
    case Concavity::Downward: return "downward";
    case Concavity::Linear: return "linear";
    }
    return "linear";
}

std::string_view to_string(Spacing s) noexcept {
    return s == Spacing::Geometric ? "geometric" : "uniform";
}

Spacing parse_spacing(std::string_view text) {
    if (text == "uniform") return Spacing::Uniform;
    if (text == "geometric") return Spacing::Geometric;
    throw Error(ErrorKind::InvalidArgument, "unknown spacing '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

std::size_t Polynomial::degree() const noexcept {
    std::size_t d = coeffs_.size();
    while (d > 1 && coeffs_[d - 1] == 0.0) --d;
    return d == 0 ? 0 : d - 1;
}

double Polynomial::operator()(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

// ---------------------------------------------------------------------------
// QuadraticSegment

QuadraticSegment::QuadraticSegment(Quadratic coeffs, std::array<double, 3> nodes, BlendMode mode)
    : coeffs_(coeffs), nodes_(nodes), mode_(mode) {
    if (!(nodes_[0] < nodes_[1] && nodes_[1] < nodes_[2])) {
        throw Error(ErrorKind::DegenerateNodes, "segment nodes must be strictly increasing");
    }
    if (!std::isfinite(coeffs_.a) || !std::isfinite(coeffs_.b) || !std::isfinite(coeffs_.c)) {
        throw Error(ErrorKind::NonFiniteValue, "segment coefficients must be finite");
    }
}

double QuadraticSegment::integrate(double u, double v) const noexcept {
    // In t = x − m the segment is a·t² + b'·t + c', so the antiderivative
    // avoids cancelling large monomial terms when the domain sits far from 0.
    const double m = mid();
    const double b1 = coeffs_.slope(m);
    const double c1 = coeffs_(m);
    const auto prim = [&](double t) { return ((coeffs_.a / 3.0 * t + b1 / 2.0) * t + c1) * t; };
    return prim(v - m) - prim(u - m);
}

// ---------------------------------------------------------------------------
// PiecewisePoly

PiecewisePoly::PiecewisePoly(std::vector<QuadraticSegment> segments, BlendMode mode)
    : segments_(std::move(segments)), mode_(mode) {
    if (segments_.empty()) {
        throw Error(ErrorKind::TooFewPoints, "piecewise model needs at least one segment");
    }
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
        if (segments_[i].hi() != segments_[i + 1].lo()) {
            throw Error(ErrorKind::InvalidArgument,
                        "segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                            " do not share a knot");
        }
    }
}

std::size_t PiecewisePoly::segment_index(double x) const {
    if (!contains(x)) {
        throw Error(ErrorKind::OutOfDomain, "x = " + fmt_num(x) + " outside [" + fmt_num(lo()) +
                                                ", " + fmt_num(hi()) + "]");
    }
    auto it = std::lower_bound(segments_.begin(), segments_.end(), x,
                               [](const QuadraticSegment& s, double v) { return s.hi() < v; });
    return static_cast<std::size_t>(it - segments_.begin());
}

double PiecewisePoly::evaluate(double x) const {
    return segments_[segment_index(x)](x);
}

OneSidedDerivative PiecewisePoly::derivative_at(double x) const {
    const std::size_t i = segment_index(x);
    const double left = segments_[i].slope(x);
    if (x == segments_[i].hi() && i + 1 < segments_.size()) {
        return {left, segments_[i + 1].slope(x)};
    }
    return {left, left};
}

double PiecewisePoly::integral(double a, double b) const {
    if (a > b) {
        throw Error(ErrorKind::InvalidArgument, "integral bounds reversed");
    }
    if (!contains(a) || !contains(b)) {
        throw Error(ErrorKind::OutOfDomain, "integral bounds [" + fmt_num(a) + ", " + fmt_num(b) +
                                                "] leave the model domain");
    }
    double total = 0.0;
    for (const auto& seg : segments_) {
        const double u = std::max(a, seg.lo());
        const double v = std::min(b, seg.hi());
        if (u < v) total += seg.integrate(u, v);
    }
    return total;
}

// ---------------------------------------------------------------------------
// construction

LinearFn secant_line(SamplePoint p, SamplePoint q) {
    require_distinct(p.x, q.x);
    const double slope = (q.y - p.y) / (q.x - p.x);
    // Anchor the intercept on the point nearer the origin to limit rounding.
    const SamplePoint& anchor = std::abs(p.x) <= std::abs(q.x) ? p : q;
    return {slope, anchor.y - slope * anchor.x};
}

Quadratic lagrange_quadratic(SamplePoint p0, SamplePoint p1, SamplePoint p2) {
    require_distinct(p0.x, p1.x);
    require_distinct(p0.x, p2.x);
    require_distinct(p1.x, p2.x);

    const std::array<SamplePoint, 3> p{p0, p1, p2};
    Quadratic q;
    for (int i = 0; i < 3; ++i) {
        const double xj = p[(i + 1) % 3].x;
        const double xk = p[(i + 2) % 3].x;
        const double w = p[i].y / ((p[i].x - xj) * (p[i].x - xk));
        q.a += w;
        q.b -= w * (xj + xk);
        q.c += w * xj * xk;
    }
    return q;
}

Polynomial lagrange_general(std::span<const SamplePoint> points) {
    const std::size_t n = points.size();
    if (n == 0) throw Error(ErrorKind::TooFewPoints, "no interpolation nodes");
    if (n > kMaxLagrangeNodes) {
        throw Error(ErrorKind::TooManyNodes, std::to_string(n) + " nodes exceeds the limit of " +
                                                 std::to_string(kMaxLagrangeNodes));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) require_distinct(points[i].x, points[j].x);

    std::vector<double> result(n, 0.0);
    std::vector<double> basis;
    for (std::size_t j = 0; j < n; ++j) {
        basis.assign(1, 1.0);
        double denom = 1.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m == j) continue;
            // basis *= (x − x_m)
            basis.push_back(0.0);
            for (std::size_t k = basis.size() - 1; k > 0; --k) {
                basis[k] = basis[k - 1] - points[m].x * basis[k];
            }
            basis[0] *= -points[m].x;
            denom *= points[j].x - points[m].x;
        }
        const double w = points[j].y / denom;
        for (std::size_t k = 0; k < n; ++k) result[k] += w * basis[k];
    }
    return Polynomial(std::move(result));
}

QuadraticSegment build_segment(SamplePoint p0, SamplePoint p1, SamplePoint p2, BlendMode mode) {
    if (!(p0.x < p1.x && p1.x < p2.x)) {
        throw Error(ErrorKind::DegenerateNodes, "segment nodes must be strictly increasing");
    }
    Quadratic q = lagrange_quadratic(p0, p1, p2);
    if (mode != BlendMode::PureLagrange) {
        const LinearFn chord =
            mode == BlendMode::EndpointSecant ? secant_line(p0, p2) : secant_line(p1, p2);
        q = {0.5 * q.a, 0.5 * (q.b + chord.slope), 0.5 * (q.c + chord.intercept)};
    }
    return QuadraticSegment(q, {p0.x, p1.x, p2.x}, mode);
}

PiecewisePoly build_piecewise(const SampleSeries& series, BlendMode mode, EvenPolicy even) {
    std::size_t n = series.size();
    if (n < 3) {
        throw Error(ErrorKind::TooFewPoints,
                    "need at least 3 samples, got " + std::to_string(n));
    }
    if (n % 2 == 0) {
        if (even == EvenPolicy::Reject) {
            throw Error(ErrorKind::EvenSeries,
                        std::to_string(n) + " samples; piecewise models need an odd count (2m+1)");
        }
        --n;
    }
    std::vector<QuadraticSegment> segs;
    segs.reserve((n - 1) / 2);
    for (std::size_t i = 0; i + 2 < n; i += 2) {
        segs.push_back(build_segment(series[i], series[i + 1], series[i + 2], mode));
    }
    return PiecewisePoly(std::move(segs), mode);
}

// ---------------------------------------------------------------------------
// analysis

double segment_average(const QuadraticSegment& seg) noexcept {
    // Mean of a·t² over [−h, h] is a·h²/3; the odd term averages out.
    const double h = 0.5 * (seg.hi() - seg.lo());
    return seg(seg.mid()) + seg.a() * h * h / 3.0;
}

// No absolute floor: runtimes in seconds have |b|, |c| far below 1 and would
// otherwise all read as straight.
double linear_tolerance(const Quadratic& q) noexcept {
    return 1e-12 * std::max(std::abs(q.b), std::abs(q.c));
}

Concavity concavity(const QuadraticSegment& seg, double tolerance) noexcept {
    if (seg.a() > tolerance) return Concavity::Upward;
    if (seg.a() < -tolerance) return Concavity::Downward;
    return Concavity::Linear;
}

Concavity concavity(const QuadraticSegment& seg) noexcept {
    return concavity(seg, linear_tolerance(seg.coeffs()));
}

double representative_input(const QuadraticSegment& seg) {
    if (concavity(seg) == Concavity::Linear) return seg.mid();

    // With t = δ − m: a·t² + b'·t + c' = c' + a·h²/3, i.e. a·t² + b'·t − a·h²/3 = 0.
    // The discriminant b'² + 4a²h²/3 is always positive.
    const double a = seg.a();
    const double m = seg.mid();
    const double h = 0.5 * (seg.hi() - seg.lo());
    const double b1 = seg.slope(m);
    const double c0 = -a * h * h / 3.0;
    const double disc = std::sqrt(b1 * b1 - 4.0 * a * c0);
    const double q = -0.5 * (b1 + std::copysign(disc, b1));
    std::array<double, 2> roots{q / a, c0 / q};
    std::sort(roots.begin(), roots.end());
    for (double t : roots) {
        const double delta = m + t;
        if (delta > seg.lo() && delta < seg.hi()) return delta;
    }
    throw Error(ErrorKind::NoRootInRange, "no representative input inside [" + fmt_num(seg.lo()) +
                                              ", " + fmt_num(seg.hi()) + "]");
}

double representative_input(const PiecewisePoly& pw) {
    const double avg = pw.integral(pw.lo(), pw.hi()) / (pw.hi() - pw.lo());
    for (const auto& seg : pw.segments()) {
        // Roots of seg(x) = avg, again in t = x − m.
        const double m = seg.mid();
        const double b1 = seg.slope(m);
        const double c1 = seg(m) - avg;
        std::vector<double> roots;
        if (concavity(seg) == Concavity::Linear) {
            if (b1 != 0.0) roots.push_back(-c1 / b1);
        } else if (const double d = b1 * b1 - 4.0 * seg.a() * c1; d >= 0.0) {
            const double q = -0.5 * (b1 + std::copysign(std::sqrt(d), b1));
            roots.push_back(q / seg.a());
            if (q != 0.0) roots.push_back(c1 / q);
        }
        std::sort(roots.begin(), roots.end());
        for (double t : roots) {
            if (m + t >= seg.lo() && m + t <= seg.hi()) return m + t;
        }
    }
    return 0.5 * (pw.lo() + pw.hi());
}

Quadratic self_similar_next(const Quadratic& q) noexcept {
    return {q.a / 4.0, q.b / 2.0, q.c + 1.0};
}

// ---------------------------------------------------------------------------
// sampling helpers

std::vector<double> segment_edges(double from, double to, std::size_t segments, Spacing spacing) {
    if (segments == 0) throw Error(ErrorKind::InvalidArgument, "segment count must be positive");
    if (!(from < to)) throw Error(ErrorKind::InvalidArgument, "'from' must be below 'to'");
    if (spacing == Spacing::Geometric && !(from > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "geometric spacing needs a positive lower bound");
    }
    std::vector<double> edges(segments + 1);
    const double n = static_cast<double>(segments);
    // Log-space stepping keeps power-of-two layouts such as 8..64 exact.
    const double l0 = std::log2(from);
    const double l1 = std::log2(to);
    for (std::size_t i = 0; i <= segments; ++i) {
        const double k = static_cast<double>(i);
        edges[i] = spacing == Spacing::Uniform ? from + (to - from) * k / n
                                               : std::exp2(l0 + (l1 - l0) * k / n);
    }
    edges.front() = from;
    edges.back() = to;
    return edges;
}

SampleSeries sample_with_midpoints(const std::function<double(double)>& f,
                                   std::span<const double> edges, std::string label) {
    if (edges.size() < 2) throw Error(ErrorKind::TooFewPoints, "need at least two edges");
    std::vector<SamplePoint> pts;
    pts.reserve(2 * edges.size() - 1);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        pts.push_back({edges[i], f(edges[i])});
        if (i + 1 < edges.size()) {
            const double m = 0.5 * (edges[i] + edges[i + 1]);
            pts.push_back({m, f(m)});
        }
    }
    return SampleSeries(std::move(pts), std::move(label));
}

}  // namespace qseg
