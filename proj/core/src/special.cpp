#include "isolab/special.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "isolab/errors.hpp"

namespace isolab::special {
namespace {

constexpr int kMaxIterations = 100000;
constexpr double kRelEps = 1e-16;
constexpr double kTiny = 1e-300;

void check_arguments(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("incomplete gamma: shape must be finite and positive");
  }
  if (std::isnan(x) || x < 0.0) {
    throw DomainError("incomplete gamma: argument must be nonnegative");
  }
}

double log_prefactor(double a, double x) { return a * std::log(x) - x - log_gamma(a); }

// P(a, x) by the power series; converges fast for x < a + 1.
double lower_series(double a, double x) {
  double denom = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kRelEps) {
      return sum * std::exp(log_prefactor(a, x));
    }
  }
  std::ostringstream msg;
  msg << "incomplete gamma series did not converge (a=" << a << ", x=" << x << ")";
  throw NumericError(msg.str());
}

// Q(a, x) by the modified Lentz continued fraction; used for x >= a + 1.
double upper_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kRelEps) {
      return std::exp(log_prefactor(a, x)) * h;
    }
  }
  std::ostringstream msg;
  msg << "incomplete gamma continued fraction did not converge (a=" << a << ", x=" << x << ")";
  throw NumericError(msg.str());
}

}  // namespace

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double gamma_p(double a, double x) {
  check_arguments(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_arguments(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - lower_series(a, x);
  return upper_continued_fraction(a, x);
}

}  // namespace isolab::special
