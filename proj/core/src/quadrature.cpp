#include "qseg/quadrature.hpp"

#include <cmath>

#include "qseg/error.hpp"

namespace qseg {

namespace {

struct Panel {
    double a, fa, m, fm, b, fb, whole;
};

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth,
              QuadratureResult& acc) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    acc.evaluations += 2;
    const double left = simpson(p.a, p.fa, flm, p.m, p.fm);
    const double right = simpson(p.m, p.fm, frm, p.b, p.fb);
    const double delta = left + right - p.whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        acc.error_estimate += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return refine(f, {p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth - 1, acc) +
           refine(f, {p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth - 1, acc);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_depth) {
    if (!(abs_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    QuadratureResult out;
    if (a == b) return out;
    if (a > b) {
        out = adaptive_simpson(f, b, a, abs_tol, max_depth);
        out.value = -out.value;
        return out;
    }
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    out.evaluations = 3;
    // Start from two panels; a single one can alias oscillating integrands.
    const double q = 0.25 * (b - a);
    double total = 0.0;
    double xs[5] = {a, a + q, m, m + q, b};
    double fs[5] = {fa, f(xs[1]), fm, f(xs[3]), fb};
    out.evaluations += 2;
    for (int i = 0; i < 4; i += 2) {
        const double pm = xs[i + 1];
        Panel p{xs[i], fs[i], pm, fs[i + 1], xs[i + 2], fs[i + 2],
                simpson(xs[i], fs[i], fs[i + 1], xs[i + 2], fs[i + 2])};
        total += refine(f, p, 0.5 * abs_tol, max_depth, out);
    }
    out.value = total;
    if (!std::isfinite(total)) throw Error(ErrorKind::NonFiniteValue, "integrand is not finite");
    return out;
}

}  // namespace qseg
