#include "isolab/measures1d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "isolab/errors.hpp"
#include "isolab/params.hpp"
#include "isolab/special.hpp"

namespace isolab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBisectionWidth = 1e-13;
constexpr int kMaxBisections = 4000;
constexpr int kNewtonSteps = 3;

void require_probability_open(double a, const char* what) {
  if (!(a > 0.0 && a < 1.0)) {
    std::ostringstream msg;
    msg << what << ": probability must lie in (0, 1), got " << a;
    throw DomainError(msg.str());
  }
}

// Solves tail(t) = target for a monotone `tail` on [lo, hi], where the
// bracket already satisfies the sign condition. `decreasing` selects the
// orientation; `slope` returns |d tail / dt| (the density) for the Newton
// polish. Width is relative so that tiny quantiles near 0 resolve.
double invert_monotone(const std::function<double(double)>& tail, bool decreasing,
                       double target, double lo, double hi,
                       const std::function<double(double)>& slope, const std::string& who) {
  const auto below = [&](double t) {
    const double v = tail(t);
    return decreasing ? v > target : v < target;
  };
  int iterations = 0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
    if (hi - lo <= kBisectionWidth * scale || mid <= lo || mid >= hi) break;
    if (++iterations > kMaxBisections) {
      std::ostringstream msg;
      msg << who << ": quantile bisection did not converge for target " << target
          << " (bracket [" << lo << ", " << hi << "])";
      throw NumericError(msg.str());
    }
    if (below(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi);
  double residual = std::abs(tail(t) - target);
  for (int step = 0; step < kNewtonSteps && residual > 0.0; ++step) {
    const double d = slope(t);
    if (!(d > 0.0) || !std::isfinite(d)) break;
    const double signed_d = decreasing ? -d : d;
    const double candidate = t - (tail(t) - target) / signed_d;
    if (!(candidate >= lo && candidate <= hi)) break;
    const double r = std::abs(tail(candidate) - target);
    if (!(r < residual)) break;
    t = candidate;
    residual = r;
  }
  return t;
}

// Expands [0, hi] until tail(hi) has crossed the target.
double expand_upper(const std::function<double(double)>& tail, bool decreasing, double target) {
  double hi = 1.0;
  for (int i = 0; i < 2000; ++i) {
    const double v = tail(hi);
    if (decreasing ? v <= target : v >= target) return hi;
    hi *= 2.0;
  }
  throw NumericError("quantile bracket expansion failed");
}

}  // namespace

LogConcave1D::LogConcave1D(Family family, double param, std::string name)
    : family_(family), param_(param), log_norm_(0.0), name_(std::move(name)) {
  switch (family_) {
    case Family::MuP:
      log_norm_ = -std::log(2.0) - special::log_gamma(1.0 + 1.0 / param_);
      break;
    case Family::NuP:
      log_norm_ = std::log(param_);
      break;
    case Family::Gamma:
      log_norm_ = -special::log_gamma(param_);
      break;
    case Family::Exponential:
      log_norm_ = 0.0;
      break;
  }
}

LogConcave1D make_mu_p(double p) {
  require_p_in_range(p);
  std::ostringstream name;
  name << "mu_" << p;
  return LogConcave1D(LogConcave1D::Family::MuP, p, name.str());
}

LogConcave1D make_nu_p(double p) {
  require_p_in_range(p);
  std::ostringstream name;
  name << "nu_" << p;
  return LogConcave1D(LogConcave1D::Family::NuP, p, name.str());
}

LogConcave1D make_gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma shape must be finite and positive");
  }
  std::ostringstream name;
  name << "gamma_" << shape;
  return LogConcave1D(LogConcave1D::Family::Gamma, shape, name.str());
}

LogConcave1D make_exponential() {
  return LogConcave1D(LogConcave1D::Family::Exponential, 1.0, "exp_1");
}

Interval LogConcave1D::support() const {
  if (family_ == Family::MuP) return {-kInf, kInf};
  return {0.0, kInf};
}

bool LogConcave1D::log_concave() const {
  return family_ != Family::Gamma || param_ >= 1.0;
}

double LogConcave1D::log_density(double t) const {
  switch (family_) {
    case Family::MuP:
      return log_norm_ - std::pow(std::abs(t), param_);
    case Family::NuP:
      if (t < 0.0) return -kInf;
      if (t == 0.0) return param_ == 1.0 ? log_norm_ : -kInf;
      return log_norm_ + (param_ - 1.0) * std::log(t) - std::pow(t, param_);
    case Family::Gamma:
      if (t < 0.0) return -kInf;
      if (t == 0.0) {
        if (param_ == 1.0) return log_norm_;
        return param_ < 1.0 ? kInf : -kInf;
      }
      return log_norm_ + (param_ - 1.0) * std::log(t) - t;
    case Family::Exponential:
      return t < 0.0 ? -kInf : -t;
  }
  return -kInf;
}

double LogConcave1D::density(double t) const { return std::exp(log_density(t)); }

double LogConcave1D::cdf(double t) const {
  if (std::isnan(t)) throw DomainError(name_ + ": cdf argument is NaN");
  switch (family_) {
    case Family::MuP: {
      const double s = std::pow(std::abs(t), param_);
      const double shape = 1.0 / param_;
      return t >= 0.0 ? 0.5 + 0.5 * special::gamma_p(shape, s) : 0.5 * special::gamma_q(shape, s);
    }
    case Family::NuP:
      return t <= 0.0 ? 0.0 : -std::expm1(-std::pow(t, param_));
    case Family::Gamma:
      return t <= 0.0 ? 0.0 : special::gamma_p(param_, t);
    case Family::Exponential:
      return t <= 0.0 ? 0.0 : -std::expm1(-t);
  }
  return 0.0;
}

double LogConcave1D::sf(double t) const {
  if (std::isnan(t)) throw DomainError(name_ + ": sf argument is NaN");
  switch (family_) {
    case Family::MuP:
      return cdf(-t);
    case Family::NuP:
      return t <= 0.0 ? 1.0 : std::exp(-std::pow(t, param_));
    case Family::Gamma:
      return t <= 0.0 ? 1.0 : special::gamma_q(param_, t);
    case Family::Exponential:
      return t <= 0.0 ? 1.0 : std::exp(-t);
  }
  return 1.0;
}

double LogConcave1D::quantile(double a) const {
  require_probability_open(a, name_.c_str());
  switch (family_) {
    case Family::MuP:
      if (a == 0.5) return 0.0;
      if (a < 0.5) return -upper_quantile(a);
      return upper_quantile(1.0 - a);
    case Family::NuP:
      return std::pow(-std::log1p(-a), 1.0 / param_);
    case Family::Exponential:
      return -std::log1p(-a);
    case Family::Gamma: {
      if (a > 0.5) return upper_quantile(1.0 - a);
      const auto f = [this](double t) { return cdf(t); };
      const auto d = [this](double t) { return density(t); };
      const double hi = expand_upper(f, false, a);
      return invert_monotone(f, false, a, 0.0, hi, d, name_);
    }
  }
  return 0.0;
}

double LogConcave1D::upper_quantile(double a) const {
  require_probability_open(a, name_.c_str());
  switch (family_) {
    case Family::MuP: {
      if (a == 0.5) return 0.0;
      if (a > 0.5) return -upper_quantile(1.0 - a);
      const auto f = [this](double t) { return sf(t); };
      const auto d = [this](double t) { return density(t); };
      const double hi = expand_upper(f, true, a);
      return invert_monotone(f, true, a, 0.0, hi, d, name_);
    }
    case Family::NuP:
      return std::pow(-std::log(a), 1.0 / param_);
    case Family::Exponential:
      return -std::log(a);
    case Family::Gamma: {
      if (a > 0.5) return quantile(1.0 - a);
      const auto f = [this](double t) { return sf(t); };
      const auto d = [this](double t) { return density(t); };
      const double hi = expand_upper(f, true, a);
      return invert_monotone(f, true, a, 0.0, hi, d, name_);
    }
  }
  return 0.0;
}

ProfilePoint bobkov_profile(const LogConcave1D& m, double a) {
  require_probability_open(a, "bobkov_profile");
  if (!m.log_concave()) {
    throw DomainError("bobkov_profile: " + m.name() + " is not log-concave");
  }
  const double left = m.density(m.quantile(a));
  const double right = m.density(m.upper_quantile(a));
  const double value = std::min(left, right);
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream msg;
    msg << "bobkov_profile: non-finite profile for " << m.name() << " at a=" << a;
    throw NumericError(msg.str());
  }
  return {a, value};
}

double profile_shape(double p, double a) {
  require_probability_open(a, "profile_shape");
  const double m = std::min(a, 1.0 - a);
  return m * std::pow(std::log(1.0 / m), 1.0 - 1.0 / p);
}

ProfileComparison profile_comparison(double p, std::span<const double> a_grid) {
  require_p_in_range(p);
  if (a_grid.empty()) throw DomainError("profile_comparison: empty grid");
  for (double a : a_grid) require_probability_open(a, "profile_comparison");

  const LogConcave1D mu = make_mu_p(p);
  const LogConcave1D nu = make_nu_p(p);
  ProfileComparison out;
  out.p = p;
  out.a_grid.assign(a_grid.begin(), a_grid.end());
  for (double a : a_grid) {
    const double shape = profile_shape(p, a);
    out.mu_ratio.push_back(bobkov_profile(mu, a).value / shape);
    out.nu_ratio.push_back(bobkov_profile(nu, a).value / shape);
  }
  out.mu_min = *std::min_element(out.mu_ratio.begin(), out.mu_ratio.end());
  out.mu_max = *std::max_element(out.mu_ratio.begin(), out.mu_ratio.end());
  out.nu_min = *std::min_element(out.nu_ratio.begin(), out.nu_ratio.end());
  return out;
}

}  // namespace isolab
