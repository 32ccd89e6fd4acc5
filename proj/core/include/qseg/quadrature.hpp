#pragma once

#include <functional>

namespace qseg {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

/// Adaptive Simpson with Richardson correction. The absolute tolerance is
/// split between halves on every refinement.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol = 1e-10, int max_depth = 48);

}  // namespace qseg
