#include "isolab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "isolab/errors.hpp"
#include "isolab/format.hpp"

namespace isolab {
namespace {

constexpr double kBadGradientFraction = 1e-3;
constexpr std::size_t kLipschitzPairs = 1000;
constexpr double kLipschitzSlack = 1e-9;

void require_nonempty(const SampleBatch& batch, const char* who) {
  if (batch.count == 0 || batch.dim == 0) {
    throw DomainError(std::string(who) + ": empty batch");
  }
}

std::vector<double> evaluate(const SampleBatch& batch, const Functional& f) {
  std::vector<double> values(batch.count);
  for (std::size_t i = 0; i < batch.count; ++i) values[i] = f(batch.row(i));
  return values;
}

// Count of values >= t in an ascending array.
std::uint64_t count_at_least(const std::vector<double>& sorted, double t) {
  return static_cast<std::uint64_t>(sorted.end() -
                                    std::lower_bound(sorted.begin(), sorted.end(), t));
}

// Count of values > t in an ascending array.
std::uint64_t count_above(const std::vector<double>& sorted, double t) {
  return static_cast<std::uint64_t>(sorted.end() -
                                    std::upper_bound(sorted.begin(), sorted.end(), t));
}

}  // namespace

EstimateCI exact_value(double v) { return {v, 0.0, 0}; }

void MomentAccumulator::add(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double n_a = static_cast<double>(count_);
  const double n_b = static_cast<double>(other.count_);
  const double total = n_a + n_b;
  const double delta = other.mean_ - mean_;
  mean_ += delta * n_b / total;
  m2_ += other.m2_ + delta * delta * n_a * n_b / total;
  count_ += other.count_;
}

double MomentAccumulator::variance() const {
  if (count_ < 2) return 0.0;
  return std::max(0.0, m2_ / static_cast<double>(count_ - 1));
}

EstimateCI MomentAccumulator::estimate() const {
  if (count_ == 0) return {0.0, 0.0, 0};
  return {mean_, std::sqrt(variance() / static_cast<double>(count_)), count_};
}

EstimateCI binomial_estimate(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw DomainError("binomial_estimate: zero trials");
  if (successes > trials) throw DomainError("binomial_estimate: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double q = static_cast<double>(successes) / n;
  return {q, std::sqrt(q * (1.0 - q) / n), trials};
}

double proportion_upper_limit(std::uint64_t successes, std::uint64_t trials) {
  const EstimateCI e = binomial_estimate(successes, trials);
  if (successes == 0) return 3.0 / static_cast<double>(trials);
  return e.hi();
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "PASS";
    case Verdict::Fail:
      return "FAIL";
    case Verdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

Verdict verdict_at_least(const EstimateCI& lhs, double rhs, double rhs_stderr) {
  const double diff = lhs.mean - rhs;
  const double se = std::hypot(lhs.std_err, rhs_stderr);
  // Exact comparisons still tolerate rounding in the last few bits.
  const double slack = 1e-12 * std::max({1.0, std::abs(lhs.mean), std::abs(rhs)});
  if (se == 0.0) return diff >= -slack ? Verdict::Pass : Verdict::Fail;
  if (diff - 3.0 * se >= -slack) return Verdict::Pass;
  if (diff + 3.0 * se < -slack) return Verdict::Fail;
  return Verdict::Inconclusive;
}

Verdict verdict_at_most(const EstimateCI& lhs, double rhs, double rhs_stderr) {
  return verdict_at_least({-lhs.mean, lhs.std_err, lhs.n_samples}, -rhs, rhs_stderr);
}

Verdict verdict_holds_within(const EstimateCI& lhs, double rhs, double rhs_stderr) {
  const double se = std::hypot(lhs.std_err, rhs_stderr);
  const double slack = 1e-12 * std::max({1.0, std::abs(lhs.mean), std::abs(rhs)});
  return lhs.mean - rhs >= -3.0 * se - slack ? Verdict::Pass : Verdict::Fail;
}

Verdict verdict_agrees(const EstimateCI& estimate, double exact, bool proportion) {
  double se = estimate.std_err;
  if (proportion && estimate.n_samples > 0) {
    const double q = std::clamp(exact, 0.0, 1.0);
    se = std::max(se, std::sqrt(q * (1.0 - q) / static_cast<double>(estimate.n_samples)));
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(exact));
  return std::abs(estimate.mean - exact) <= 3.0 * se + slack ? Verdict::Pass : Verdict::Fail;
}

EstimateCI estimate_measure(const SampleBatch& batch, const TestSet& set) {
  require_nonempty(batch, "estimate_measure");
  if (batch.dim != set.dim()) {
    std::ostringstream msg;
    msg << "estimate_measure: batch dim " << batch.dim << " != set dim " << set.dim();
    throw DomainError(msg.str());
  }
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < batch.count; ++i) hits += set.indicator(batch.row(i)) ? 1 : 0;
  return binomial_estimate(hits, batch.count);
}

std::vector<double> default_eps_ladder(const PBallParams& params) {
  const double scale = std::pow(static_cast<double>(params.n), -params.radius_exponent());
  return {0.1 * scale, 0.05 * scale, 0.02 * scale, 0.01 * scale};
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> weights,
                              std::span<const double> covariance) {
  const std::size_t k = x.size();
  if (k == 0 || y.size() != k || weights.size() != k) {
    throw DomainError("weighted_linear_fit: inconsistent input sizes");
  }
  if (!covariance.empty() && covariance.size() != k * k) {
    throw DomainError("weighted_linear_fit: covariance must be k x k");
  }
  LinearFit fit;
  if (k == 1) {
    fit.intercept = y[0];
    fit.intercept_stderr =
        covariance.empty() ? std::sqrt(1.0 / weights[0]) : std::sqrt(covariance[0]);
    return fit;
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    s0 += weights[i];
    s1 += weights[i] * x[i];
    s2 += weights[i] * x[i] * x[i];
  }
  const double det = s0 * s2 - s1 * s1;
  if (!(det > 0.0)) throw NumericError("weighted_linear_fit: degenerate design");
  std::vector<double> c(k);
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = weights[i] * (s2 - s1 * x[i]) / det;
    fit.intercept += c[i] * y[i];
    fit.slope += weights[i] * (s0 * x[i] - s1) / det * y[i];
  }
  double var = 0.0;
  if (covariance.empty()) {
    var = s2 / det;
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) var += c[i] * covariance[i * k + j] * c[j];
    }
  }
  fit.intercept_stderr = std::sqrt(std::max(0.0, var));
  return fit;
}

ContentEstimate estimate_content_from_distances(std::span<const double> dist,
                                                std::span<const double> eps_ladder) {
  if (dist.empty()) throw DomainError("estimate_content: no samples");
  if (eps_ladder.empty()) throw DomainError("estimate_content: empty eps ladder");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0)) throw DomainError("estimate_content: eps must be positive");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1])) {
      throw DomainError("estimate_content: eps ladder must be strictly decreasing");
    }
  }
  const std::size_t k = eps_ladder.size();
  const std::uint64_t total = dist.size();
  const double n = static_cast<double>(total);
  std::uint64_t inside = 0;
  std::vector<std::uint64_t> shell(k, 0);
  for (double d : dist) {
    if (d == 0.0) {
      ++inside;
      continue;
    }
    // Rungs are decreasing, so the shells containing d form a prefix.
    for (std::size_t j = 0; j < k && d <= eps_ladder[j]; ++j) ++shell[j];
  }

  ContentEstimate out;
  out.measure = binomial_estimate(inside, total);
  std::vector<double> pi(k), q(k), w(k), cov(k * k);
  bool any = false;
  for (std::size_t j = 0; j < k; ++j) {
    any = any || shell[j] > 0;
    pi[j] = static_cast<double>(shell[j]) / n;
    q[j] = pi[j] / eps_ladder[j];
    const EstimateCI b = binomial_estimate(shell[j], total);
    out.per_epsilon.emplace_back(eps_ladder[j],
                                 EstimateCI{q[j], b.std_err / eps_ladder[j], total});
  }
  // Shell j is nested in shell i for j >= i, so cov(pi_i, pi_j) = (pi_j - pi_i pi_j) / N.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double inner = pi[std::max(i, j)];
      cov[i * k + j] = (inner - pi[i] * pi[j]) / (n * eps_ladder[i] * eps_ladder[j]);
    }
    // Empty shells would get infinite weight; floor at half a count.
    const double floor_pi = std::max(pi[i], 0.5 / n);
    w[i] = n * eps_ladder[i] * eps_ladder[i] / (floor_pi * (1.0 - std::min(floor_pi, 0.5)));
  }
  out.smallest_eps = out.per_epsilon.back().second;
  out.inconclusive = !any;
  const LinearFit fit = weighted_linear_fit(eps_ladder, q, w, cov);
  out.extrapolated = {fit.intercept, fit.intercept_stderr, total};
  return out;
}

ContentEstimate estimate_content(const SampleBatch& batch, const TestSet& set,
                                 std::span<const double> eps_ladder) {
  require_nonempty(batch, "estimate_content");
  if (batch.dim != set.dim()) throw DomainError("estimate_content: dimension mismatch");
  std::vector<double> dist(batch.count);
  for (std::size_t i = 0; i < batch.count; ++i) dist[i] = set.dist(batch.row(i));
  ContentEstimate out = estimate_content_from_distances(dist, eps_ladder);
  out.analytic = set.analytic_boundary(batch.params);
  return out;
}

ContentEstimate estimate_content(const BatchSampler& sampler, const TestSet& set,
                                 std::span<const double> eps_ladder, std::size_t count,
                                 std::uint64_t seed) {
  return estimate_content(sampler(count, seed), set, eps_ladder);
}

std::vector<TailPoint> estimate_tail(const SampleBatch& batch, const Functional& f,
                                     std::span<const double> thresholds) {
  require_nonempty(batch, "estimate_tail");
  std::vector<double> values = evaluate(batch, f);
  std::sort(values.begin(), values.end());
  std::vector<TailPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    if (!std::isfinite(t)) throw DomainError("estimate_tail: thresholds must be finite");
    TailPoint point;
    point.t = t;
    point.hits = count_at_least(values, t);
    point.prob = binomial_estimate(point.hits, batch.count);
    point.rare = point.hits < kRareCount;
    out.push_back(point);
  }
  return out;
}

std::vector<TailPoint> estimate_tail(const BatchSampler& sampler, const Functional& f,
                                     std::span<const double> thresholds, std::size_t count,
                                     std::uint64_t seed) {
  return estimate_tail(sampler(count, seed), f, thresholds);
}

MedianPhi estimate_median_and_phi(const SampleBatch& batch, const Functional& f,
                                  std::span<const double> h_grid) {
  require_nonempty(batch, "estimate_median_and_phi");
  MedianPhi out;
  std::vector<double> values = evaluate(batch, f);

  const std::size_t pairs = std::min(kLipschitzPairs, batch.count / 2);
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto x = batch.row(2 * i);
    const auto y = batch.row(2 * i + 1);
    double d2 = 0.0;
    for (std::size_t j = 0; j < batch.dim; ++j) d2 += (x[j] - y[j]) * (x[j] - y[j]);
    const double gap = std::abs(values[2 * i] - values[2 * i + 1]);
    ++out.lipschitz_checked;
    if (gap > std::sqrt(d2) * (1.0 + kLipschitzSlack) + kLipschitzSlack) {
      ++out.lipschitz_violations;
    }
  }

  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double med = values[(n - 1) / 2];
  // Order statistics N/2 -+ 1.5 sqrt(N) bracket the median at 3 sigma.
  const double half_width = 1.5 * std::sqrt(static_cast<double>(n));
  const auto index = [&](double r) {
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(n - 1)));
  };
  const double lo = values[index(0.5 * n - half_width)];
  const double hi = values[index(0.5 * n + half_width)];
  out.median = {med, (hi - lo) / 6.0, n};

  for (double h : h_grid) {
    TailPoint point;
    point.t = h;
    point.hits = count_above(values, med + h);
    point.prob = binomial_estimate(point.hits, n);
    point.rare = point.hits < kRareCount;
    out.phi.push_back(point);
  }
  return out;
}

MedianPhi estimate_median_and_phi(const BatchSampler& sampler, const Functional& f,
                                  std::span<const double> h_grid, std::size_t count,
                                  std::uint64_t seed) {
  return estimate_median_and_phi(sampler(count, seed), f, h_grid);
}

EstimateCI integrate_grad(const SampleBatch& batch, const ScalarField& f, double power) {
  require_nonempty(batch, "integrate_grad");
  MomentAccumulator acc;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < batch.count; ++i) {
    double g = 0.0;
    try {
      g = grad_norm(f, batch.row(i));
    } catch (const NumericError&) {
      ++bad;
      continue;
    }
    acc.add(power == 1.0 ? g : std::pow(g, power));
  }
  if (static_cast<double>(bad) > kBadGradientFraction * static_cast<double>(batch.count)) {
    std::ostringstream msg;
    msg << "integrate_grad: non-finite gradient at " << bad << " of " << batch.count
        << " samples";
    throw NumericError(msg.str());
  }
  return acc.estimate();
}

EstimateCI integrate_grad(const BatchSampler& sampler, const ScalarField& f, std::size_t count,
                          std::uint64_t seed, double power) {
  return integrate_grad(sampler(count, seed), f, power);
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

void write_estimate_header(std::ostream& out) {
  out << "quantity,p,n,param,mean,std_err,n_samples,verdict\n";
}

void write_estimate_row(std::ostream& out, std::string_view quantity, const PBallParams& params,
                        double param, const EstimateCI& e, Verdict verdict) {
  out << quantity << ',' << format_double(params.p) << ',' << params.n << ','
      << format_double(param) << ',' << format_double(e.mean) << ',' << format_double(e.std_err)
      << ',' << e.n_samples << ',' << to_string(verdict) << '\n';
}

}  // namespace isolab
