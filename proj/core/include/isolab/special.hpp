#pragma once

// Special functions used by the exact one-dimensional machinery.

namespace isolab::special {

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly so that small tails keep full relative accuracy.
double gamma_q(double a, double x);

double log_gamma(double x);

}  // namespace isolab::special
