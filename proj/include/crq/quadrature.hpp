#pragma once

#include <functional>

namespace crq {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int intervals = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_intervals = 4000;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration over [a, b]:
/// the interval with the largest error estimate is bisected until the summed
/// estimate falls under max(abs_tol, rel_tol*|value|).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opts = {});

/// Integral over [a, inf) with a > 0, mapped onto [0, 1/a] via u = 1/v.
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                 const QuadOptions& opts = {});

}  // namespace crq
