#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isolab/geometry.hpp"
#include "isolab/measures1d.hpp"
#include "isolab/montecarlo.hpp"
#include "isolab/report.hpp"
#include "isolab/sampling.hpp"

namespace isolab {

/// Monte Carlo budget shared by the checks.
struct SuiteOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  SamplingOptions sampling;
  std::vector<double> eps_ladder;  // empty: default_eps_ladder(params)
};

/// Coordinate half-space {x_1 >= t} with V_{p,n}-measure a.
TestSet coordinate_half_space_at(const PBallParams& params, double a);

/// Boundary measure of coordinate half-spaces (exact marginal oracle) against
/// n^{1/p} a log^{1-1/p}(1/a), for a in (0, 1/2]. Fitted: c_lo, c_hi, band,
/// and band_resolved (points with a >= e^{-n} only). With compare_sets, the
/// diagonal half-space and the Euclidean-ball complement of the same measure
/// are estimated as well; their comparison is recorded, never failed.
CheckResult check_isoperimetric_order(const PBallParams& params, std::span<const double> a_grid,
                                      const SuiteOptions& options, bool compare_sets = false);

/// mu+(A) >= (1/2r)(a log 1/a + (1-a) log 1/(1-a) + log V{||x||_2 <= r})
/// for coordinate half-spaces, with r = multiplier n^{-(2-p)/(2p)}.
CheckResult check_bobkov_inequality(const PBallParams& params, std::span<const double> a_grid,
                                    std::span<const double> r_multipliers,
                                    const SuiteOptions& options);

/// mu+(A) >= (n/2r)([a^{1-1/n} + (1-a)^{1-1/n}] V{||x||_2 <= r}^{1/n} - 1).
CheckResult check_barthe_dimensional(const PBallParams& params, std::span<const double> a_grid,
                                     std::span<const double> r_multipliers,
                                     const SuiteOptions& options);

/// {0.5, 0.75, 1, 1.25, 1.5, 2, 2.5, 3} n^{-(2-p)/(2p)}, keeping t <= 1.
std::vector<double> default_norm_tail_grid(const PBallParams& params);

/// V{||x||_2 >= t} against exp(-c n t^p) with c fitted as the smallest
/// -log P / (n t^p) over resolved points. For p = 2 the exact tail 1 - t^n
/// is compared as well.
CheckResult check_norm_tail(const PBallParams& params, std::span<const double> t_grid,
                            const SuiteOptions& options);

enum class LipschitzFunctional { Coordinate, Diagonal, EuclideanNorm };

std::string to_string(LipschitzFunctional f);
Functional make_functional(LipschitzFunctional f, std::size_t dim);

/// V{F > Med F + t} against (1/2) exp(-c n t^p), with t = multiplier sd(F).
CheckResult check_lipschitz_concentration(const PBallParams& params, LipschitzFunctional f,
                                          std::span<const double> t_multipliers,
                                          const SuiteOptions& options);

struct ConcentrationCurve {
  double c = 0.0;
  double p = 2.0;
  int n = 1;
  std::vector<double> u_grid;
  std::vector<double> psi_numeric;
  std::vector<double> psi_closed_form;  // [log(1/2u) / (c_1 n)]^{1/p}, c_1 = (c/p)^p
};

/// Integrates psi'(u) = -1 / (c n^{1/p} u log^{1-1/p}(1/u)) from 1/2 down to
/// each u in (0, 1/2] by adaptive quadrature.
ConcentrationCurve concentration_from_isoperimetry(double c, double p, int n,
                                                   std::span<const double> u_grid);
CheckResult check_concentration_curve(const ConcentrationCurve& curve);

/// Coordinate half-spaces of the product measure: exact 1-D profiles of
/// mu_p (coordinates 1..n) and nu_p (coordinate n+1) over a log^{1-1/p}(1/a).
CheckResult check_product_isoperimetry(const PBallParams& params,
                                       std::span<const double> a_grid);

/// 1-D profile ratios of mu_p and nu_p against profile_shape.
CheckResult check_profile_comparison(double p, std::span<const double> a_grid);

/// Calibrates the smallest C2 on a ladder such that both
/// V{||x||_2 >= C2 n^{-(2-p)/(2p)}} and mu{||z||_p <= n^{1/p} / C2} lie below
/// exp(-C1 n^{p/2}) for C1 in {1, 2}; small-ball estimates are compared with
/// the exact law ||z||_p^p ~ Gamma(n/p + 1).
CheckResult check_radius_calibration(const PBallParams& params, const SuiteOptions& options);

/// (e / (1 - alpha)) [A Gamma(1 - alpha)]^{1 / (1 - alpha)}.
double small_sum_constant(double A, double alpha);

/// P{X_1 + ... + X_N <= N eps} for i.i.d. Gamma(shape, 1) variables, whose
/// density is bounded by x^{-(1 - shape)} / Gamma(shape). Compares the Monte
/// Carlo estimate with the large-deviation bound and the exact Gamma CDF.
CheckResult check_small_sum_bound(double shape, int terms, std::span<const double> eps_grid,
                                  std::size_t trials, std::uint64_t seed);

/// V{phi = 0} and V{phi = 1} when an exact formula applies.
struct PlateauMasses {
  double zero;
  double one;
};
std::optional<PlateauMasses> plateau_masses(const PBallParams& params, const PlateauFunction& f);

/// Ramps across a coordinate half-space (gentle and steep), a radial ramp
/// and a constant.
std::vector<PlateauFunction> default_plateau_catalog(const PBallParams& params);

/// int ||grad phi||_2 dV >= int_0^1 V+{phi > u} du, the u-integral by a
/// 64-point midpoint rule over Minkowski-content estimates.
CheckResult check_coarea(const PBallParams& params, std::span<const PlateauFunction> catalog,
                         const SuiteOptions& options);

/// phi(x) = 0 v (1 - dist(x, A_r) / s) with A_r the closed r-enlargement of a
/// half-space: compares int ||grad phi||_2 (finite differences) with
/// s^{-1} V{r < dist <= r + s} sample by sample, then extrapolates the
/// ladder s -> 0 (r = s / 10) and compares with the exact boundary measure.
CheckResult check_functional_equivalence(const PBallParams& params, const TestSet& set,
                                         std::span<const double> s_ladder,
                                         const SuiteOptions& options);

/// int ||grad phi||_2^2 dV against c^2 n^{2/p} / sum_{i=1}^{K} 2^i (i log 2)^{-(2-2/p)},
/// K = ceil(log2(1/a)), for half-space ramps with V{phi=0} >= 1/2 and
/// V{phi=1} = a. `c` is the isoperimetric constant fitted on the same (p, n).
CheckResult check_l2_form(const PBallParams& params, std::span<const double> a_grid, double c,
                          const SuiteOptions& options);

/// Walks the cut-off argument on product-measure samples: every inequality
/// link, the error budget, the pointwise gradient transfer through the
/// Jacobian, and the plateau mass mu{g h2 = 1} >= a / 2 with a = V{f = 1}.
/// Requires V{f = 0} >= 1/2 and V{f = 1} >= exp(-C n^{p/2}).
CheckResult verify_cutoff_chain(const PBallParams& params, const PlateauFunction& f,
                                const CutoffParams& cutoff, double C,
                                const SuiteOptions& options);

/// Half-space ramp with V{f = 1} = a and V{f = 0} = 1/2.
PlateauFunction default_chain_function(const PBallParams& params, double a);

struct IsotropyConstants {
  double scale;    // C(n, p) = Vol(B_p^n)^{-1/n}
  double sigma2;   // E x_1^2 on B_p^n
  double L;        // isotropic constant of C(n, p) B_p^n
};

IsotropyConstants isotropy_constants(double p, int n);

/// C(n, p) / n^{1/p} across n_grid; its max / min must stay below 3.
CheckResult check_isotropy_constants(double p, std::span<const int> n_grid);

/// Half-space boundary measure on the volume-one rescaled ball against a / L.
CheckResult check_kls(const PBallParams& params, std::span<const double> a_grid);

/// V{||x||_2 >= t} on the rescaled ball against exp(-c t / L) for
/// t = multiplier L sqrt(n), multipliers >= 1.
CheckResult check_paouris_tail(const PBallParams& params, std::span<const double> t_multipliers,
                               const SuiteOptions& options);

/// Jacobian operator norm against its bound on `samples` product-measure
/// points; finite-difference and SVD cross-checks on the first few.
CheckResult check_jacobian_bound(const PBallParams& params, const SuiteOptions& options);

/// Two-sample KS distance between the first coordinates of the push-forward
/// sampler and the rejection sampler, plus a one-sample KS test against the
/// exact marginal. The pass limit is kPushforwardKsLimit, raised to the 1%
/// Kolmogorov critical value when the sample is too small to resolve it.
CheckResult check_pushforward(const PBallParams& params, const SuiteOptions& options);

inline constexpr double kPushforwardKsLimit = 0.015;
inline constexpr double kKolmogorovCritical1pct = 1.628;
inline constexpr double kIsotropyBand = 3.0;

}  // namespace isolab
