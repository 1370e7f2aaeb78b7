#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isolab/geometry.hpp"
#include "isolab/sampling.hpp"

namespace isolab {

/// A Monte Carlo estimate with its standard error. The reported interval
/// is mean +- 3 std_err. Exact values carry std_err = 0 and n_samples = 0.
struct EstimateCI {
  double mean = 0.0;
  double std_err = 0.0;
  std::uint64_t n_samples = 0;

  double lo() const { return mean - 3.0 * std_err; }
  double hi() const { return mean + 3.0 * std_err; }
  bool exact() const { return n_samples == 0; }
};

EstimateCI exact_value(double v);

/// Running count / mean / sum of squared deviations; merge() combines two
/// accumulators (Chan et al.), so reductions can be split across chunks.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);
  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  /// Sample variance (n - 1 denominator); 0 for fewer than two values.
  double variance() const;
  /// Mean with standard error sqrt(variance / count).
  EstimateCI estimate() const;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// k / N with standard error sqrt(q (1 - q) / N).
EstimateCI binomial_estimate(std::uint64_t successes, std::uint64_t trials);

/// Upper confidence limit for a proportion: the 3-sigma bound, or the
/// rule-of-three bound 3 / N when no successes were observed.
double proportion_upper_limit(std::uint64_t successes, std::uint64_t trials);

enum class Verdict { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v);

/// lhs >= rhs: PASS when the whole interval of lhs - rhs is >= 0, FAIL when
/// it is entirely < 0, INCONCLUSIVE otherwise. rhs may carry its own error.
Verdict verdict_at_least(const EstimateCI& lhs, double rhs, double rhs_stderr = 0.0);
/// lhs <= rhs, with the same three-way rule.
Verdict verdict_at_most(const EstimateCI& lhs, double rhs, double rhs_stderr = 0.0);
/// lhs >= rhs for bounds that are attained: PASS unless lhs - rhs lies more
/// than three combined standard errors below zero.
Verdict verdict_holds_within(const EstimateCI& lhs, double rhs, double rhs_stderr = 0.0);
/// |estimate - exact| <= 3 std_err, where std_err is the larger of the
/// estimate's and the binomial error implied by the exact proportion.
Verdict verdict_agrees(const EstimateCI& estimate, double exact, bool proportion);

/// Fraction of batch rows inside the set.
EstimateCI estimate_measure(const SampleBatch& batch, const TestSet& set);

struct ContentEstimate {
  std::vector<std::pair<double, EstimateCI>> per_epsilon;  // eps strictly decreasing
  EstimateCI extrapolated;   // weighted linear-fit intercept at eps = 0
  EstimateCI smallest_eps;   // quotient at the last rung
  EstimateCI measure;        // mu(A) on the same batch
  std::optional<double> analytic;
  bool inconclusive = false;  // every enlargement shell was empty
};

/// Default ladder {0.1, 0.05, 0.02, 0.01} n^{-(2-p)/(2p)}.
std::vector<double> default_eps_ladder(const PBallParams& params);

/// One-sided enlargement quotients (mu{dist <= eps} - mu(A)) / eps and their
/// extrapolation to eps -> 0. The intercept error accounts for the
/// correlation between nested shells.
ContentEstimate estimate_content(const SampleBatch& batch, const TestSet& set,
                                 std::span<const double> eps_ladder);
ContentEstimate estimate_content(const BatchSampler& sampler, const TestSet& set,
                                 std::span<const double> eps_ladder, std::size_t count,
                                 std::uint64_t seed);

/// Same quotients built from precomputed distances to A (one per sample).
ContentEstimate estimate_content_from_distances(std::span<const double> dist,
                                                std::span<const double> eps_ladder);

using Functional = std::function<double(std::span<const double>)>;

struct TailPoint {
  double t = 0.0;
  EstimateCI prob;
  std::uint64_t hits = 0;
  bool rare = false;  // fewer than kRareCount hits
};

inline constexpr std::uint64_t kRareCount = 10;

/// P{F >= t} for each threshold.
std::vector<TailPoint> estimate_tail(const SampleBatch& batch, const Functional& f,
                                     std::span<const double> thresholds);
std::vector<TailPoint> estimate_tail(const BatchSampler& sampler, const Functional& f,
                                     std::span<const double> thresholds, std::size_t count,
                                     std::uint64_t seed);

struct MedianPhi {
  EstimateCI median;            // std_err from the order-statistic interval
  std::vector<TailPoint> phi;   // h -> P{F > median + h}
  std::size_t lipschitz_checked = 0;
  std::size_t lipschitz_violations = 0;
};

/// Empirical median of F and the deviation curve above it. F is spot-checked
/// for the 1-Lipschitz property on consecutive sample pairs.
MedianPhi estimate_median_and_phi(const SampleBatch& batch, const Functional& f,
                                  std::span<const double> h_grid);
MedianPhi estimate_median_and_phi(const BatchSampler& sampler, const Functional& f,
                                  std::span<const double> h_grid, std::size_t count,
                                  std::uint64_t seed);

/// Mean of ||grad f||_2^power over the batch. Samples where the gradient is
/// not finite are dropped; more than 0.1% of them raises NumericError.
EstimateCI integrate_grad(const SampleBatch& batch, const ScalarField& f, double power = 1.0);
EstimateCI integrate_grad(const BatchSampler& sampler, const ScalarField& f, std::size_t count,
                          std::uint64_t seed, double power = 1.0);

/// sup |F_n - F| for a sample against a continuous CDF.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
/// sup |F_n - G_m| for two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_stderr = 0.0;
};

/// Weighted least squares y ~ intercept + slope x. When `covariance` is
/// given (row-major, size x.size()^2) the intercept error is propagated
/// through it; otherwise the weights are taken as inverse variances.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> weights,
                              std::span<const double> covariance = {});

/// Header and row for `quantity,p,n,param,mean,std_err,n_samples,verdict`.
void write_estimate_header(std::ostream& out);
void write_estimate_row(std::ostream& out, std::string_view quantity, const PBallParams& params,
                        double param, const EstimateCI& e, Verdict verdict);

}  // namespace isolab
