#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace monolab::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  double l1 = 0.0;     // integral of |f|
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (21 point) on a finite interval; bisects the
/// worst piece until the summed error is below rel_tol times the L1 norm, or
/// 2^max_depth pieces (capped at 4096) exist.
Result integrate(const Integrand& f, double a, double b, double rel_tol = 1e-12,
                 unsigned max_depth = 20);

/// Same, but throws QuadratureError when the estimate misses rel_tol.
double integrate_checked(const Integrand& f, double a, double b,
                         double rel_tol = 1e-12, const char* what = "integral");

/// Single 21-point pass, no refinement. Smooth in the endpoints, which matters
/// when the result is differentiated numerically.
double kronrod21(const Integrand& f, double a, double b);

/// Integral over [a, inf) via exp-sinh.
Result integrate_to_infinity(const Integrand& f, double a,
                             double rel_tol = 1e-12);

/// Composite Simpson rule on uniformly spaced samples (odd count).
double simpson(const std::vector<double>& y, double dx);

}  // namespace monolab::quad
