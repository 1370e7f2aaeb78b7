#pragma once

#include <span>
#include <string>
#include <vector>

namespace isolab {

struct Interval {
  double lo;
  double hi;
};

/// A one-dimensional probability measure with closed-form density and a
/// CDF/quantile pair. Four families are provided:
///
///   mu_p   density exp(-|t|^p) / (2 Gamma(1 + 1/p)) on the real line
///   nu_p   density p t^{p-1} exp(-t^p) on [0, inf)
///   Gamma(k, 1) and Exp(1), the laws of |Z|^p for the coordinates above
///
/// Gamma(k, 1) with k < 1 is log-convex rather than log-concave;
/// log_concave() reports which case applies and isoperimetric queries
/// reject the log-convex instances.
class LogConcave1D {
 public:
  enum class Family { MuP, NuP, Gamma, Exponential };

  Family family() const { return family_; }
  /// p for MuP/NuP, the shape k for Gamma, 1 for Exponential.
  double parameter() const { return param_; }
  const std::string& name() const { return name_; }
  Interval support() const;
  bool log_concave() const;
  bool symmetric() const { return family_ == Family::MuP; }

  double log_density(double t) const;
  double density(double t) const;
  double cdf(double t) const;
  /// P(X > t), evaluated without cancellation in the upper tail.
  double sf(double t) const;
  /// Smallest t with cdf(t) = a.
  double quantile(double a) const;
  /// t with sf(t) = a; accurate for small a where quantile(1 - a) is not.
  double upper_quantile(double a) const;

 private:
  friend LogConcave1D make_mu_p(double p);
  friend LogConcave1D make_nu_p(double p);
  friend LogConcave1D make_gamma(double shape);
  friend LogConcave1D make_exponential();

  LogConcave1D(Family family, double param, std::string name);

  Family family_;
  double param_;
  double log_norm_;  // log of the density's normalizing constant
  std::string name_;
};

LogConcave1D make_mu_p(double p);
LogConcave1D make_nu_p(double p);
LogConcave1D make_gamma(double shape);
LogConcave1D make_exponential();

struct ProfilePoint {
  double a;
  double value;
};

/// Isoperimetric profile of a log-concave measure on the line. Half-lines
/// are extremal, so the profile is the smaller of the densities at the
/// a-quantile and at the upper a-quantile.
ProfilePoint bobkov_profile(const LogConcave1D& m, double a);

/// min(a, 1-a) * log^{1-1/p}(1 / min(a, 1-a)); the comparison shape for
/// profiles of mu_p-type measures. Requires 0 < a < 1.
double profile_shape(double p, double a);

struct ProfileComparison {
  double p = 1.0;
  std::vector<double> a_grid;
  std::vector<double> mu_ratio;  // profile(mu_p, a) / profile_shape(p, a)
  std::vector<double> nu_ratio;  // profile(nu_p, a) / profile_shape(p, a)
  double mu_min = 0.0;
  double mu_max = 0.0;
  double nu_min = 0.0;
};

/// Two-sided comparison constants between the mu_p / nu_p profiles and
/// profile_shape over a grid in (0, 1).
ProfileComparison profile_comparison(double p, std::span<const double> a_grid);

}  // namespace isolab
