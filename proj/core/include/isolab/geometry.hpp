#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isolab/params.hpp"

namespace isolab {

double lp_norm(std::span<const double> x, double p);
double l2_norm(std::span<const double> x);

struct BallVolume {
  double value;      // may overflow to inf or underflow to 0 for large n
  double log_value;  // always finite
};

/// Vol(B_p^n) = (2 Gamma(1 + 1/p))^n / Gamma(1 + n/p).
BallVolume ball_volume(double p, int n);

// Coordinate marginal of the uniform measure on B_p^n. The density is
// (1 - |t|^p)^{(n-1)/p} / Z with Z = Vol(B_p^n) / Vol(B_p^{n-1}).

double marginal_density(const PBallParams& params, double t);
/// V{x_1 >= t}; via the regularized incomplete beta function.
double marginal_sf(const PBallParams& params, double t);
double marginal_cdf(const PBallParams& params, double t);
/// The t with V{x_1 >= t} = a, for a in (0, 1).
double marginal_upper_quantile(const PBallParams& params, double a);
/// Z from the volume ratio.
double marginal_normalizer(const PBallParams& params);
/// Z by adaptive quadrature of the unnormalized density.
double marginal_normalizer_quadrature(const PBallParams& params);
/// E x_1^2 under V_{p,n}, by quadrature of the marginal.
double marginal_second_moment(const PBallParams& params);

/// A closed parametric set in R^dim: a half-space {<x, xi> >= t} with
/// ||xi||_2 = 1, or the complement of an open Euclidean ball {||x||_2 >= r}.
class TestSet {
 public:
  enum class Kind { HalfSpace, EuclidComplement };

  static TestSet half_space(std::vector<double> normal, double offset);
  static TestSet coordinate_half_space(std::size_t dim, std::size_t axis, double offset,
                                       bool negative = false);
  static TestSet euclid_complement(std::size_t dim, double radius);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const std::vector<double>& normal() const { return normal_; }
  double offset() const { return offset_; }
  double radius() const { return offset_; }
  /// True when the normal is a signed standard basis vector.
  bool is_coordinate() const;

  bool indicator(std::span<const double> x) const;
  /// Euclidean distance from x to the set; zero exactly on the set.
  double dist(std::span<const double> x) const;
  /// {x : dist(x, A) <= eps}, which stays in the same family.
  TestSet enlarged(double eps) const;

  /// V_{p,n}(A) when an exact formula applies (coordinate half-spaces,
  /// any half-space for p = 2, Euclidean complements for p = 2 or n = 1).
  std::optional<double> analytic_measure(const PBallParams& params) const;
  /// Exact lower Minkowski content, under the same conditions.
  std::optional<double> analytic_boundary(const PBallParams& params) const;

  std::string describe() const;

 private:
  TestSet(Kind kind, std::size_t dim, std::vector<double> normal, double offset);

  Kind kind_;
  std::size_t dim_;
  std::vector<double> normal_;
  double offset_;  // t for half-spaces, r for complements
};

struct CutoffParams {
  double c1 = 1.0;
  double c2 = 1.0;
  void validate() const;
};

/// 0 v (1 ^ (2 - c1 n^{(2-p)/(2p)} ||x||_2)) on R^n.
double cutoff_h1(std::span<const double> x, const PBallParams& params, const CutoffParams& c);
/// 0 v (1 ^ (c2 n^{-1/p} ||z||_p - 1)) on R^{n+1}.
double cutoff_h2(std::span<const double> z, const PBallParams& params, const CutoffParams& c);
/// Gradients of the cut-offs; zero off the open ramp. Returns the l2 norm.
double cutoff_h1_gradient(std::span<const double> x, const PBallParams& params,
                          const CutoffParams& c, std::span<double> out);
double cutoff_h2_gradient(std::span<const double> z, const PBallParams& params,
                          const CutoffParams& c, std::span<double> out);

/// Derivative of T(z) = x / ||z||_p at z = (x, y) in R^{n+1}.
struct JacobianResult {
  Eigen::MatrixXd matrix;  // n x (n+1): entry (j, i) = dT_j / dz_i
  double op_norm = 0.0;
  double pointwise_bound = 0.0;  // (1/||z||_p) (1 + n^{(2-p)/(2p)} ||T(z)||_2)
  bool within_bound() const { return op_norm <= pointwise_bound + 1e-9; }
};

struct JacobianNorms {
  double op_norm;
  double pointwise_bound;
  double z_norm;       // ||z||_p
  double image_norm;   // ||T(z)||_2
};

/// Builds the Jacobian with sign-general entries
/// (delta_ij [i <= n] - x_j sgn(z_i) |z_i|^{p-1} / ||z||_p^p) / ||z||_p.
/// Throws SingularInputError for z = 0 and KinkError when p < 2 and some
/// coordinate is exactly zero.
JacobianResult jacobian_T(std::span<const double> z, double p);

/// Operator norm and bound without materializing the matrix. The matrix is
/// [I | 0] minus a rank-one term, so J J^T is the identity plus a symmetric
/// rank-two update; its top eigenvalue comes from a 2x2 problem.
JacobianNorms jacobian_norms(std::span<const double> z, double p);

/// Applies the adjoint D*T(z) to v in R^n, writing into out (size n+1).
void jacobian_adjoint_apply(std::span<const double> z, double p, std::span<const double> v,
                            std::span<double> out);

/// Largest singular value via Jacobi SVD.
double operator_norm_svd(const Eigen::MatrixXd& m);
/// Largest singular value by power iteration on M M^T.
double operator_norm_power(const Eigen::MatrixXd& m, double tol = 1e-10, int max_iter = 10000);

/// A scalar field with an optional analytic gradient.
struct ScalarField {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;  // may be empty
};

/// ||grad f(x)||_2 from the analytic gradient when present, otherwise by
/// central differences with step 1e-6 (1 + ||x||_2). Where forward and
/// backward differences disagree (a kink) the larger one-sided norm is
/// returned. Non-finite values raise NumericError.
double grad_norm(const ScalarField& f, std::span<const double> x);

/// [0,1]-valued Lipschitz functions with a plateau: constants, ramps across a
/// half-space boundary, and radial ramps.
class PlateauFunction {
 public:
  enum class Kind { Constant, HalfSpaceRamp, RadialRamp };

  static PlateauFunction constant(std::size_t dim, double level);
  /// 1 on {<x, xi> >= t}, 0 on {<x, xi> <= t - width}, linear between.
  static PlateauFunction half_space_ramp(std::vector<double> normal, double t, double width);
  /// 1 on {||x||_2 >= r}, 0 on {||x||_2 <= r - width}, linear between.
  static PlateauFunction radial_ramp(std::size_t dim, double r, double width);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  double level() const { return level_; }
  double width() const { return width_; }

  double value(std::span<const double> x) const;
  /// Writes the gradient (zero off the open ramp) and returns its l2 norm.
  double gradient(std::span<const double> x, std::span<double> out) const;
  double grad_norm(std::span<const double> x) const;
  ScalarField as_field() const;

  /// {phi > u} for u in [0, 1) as a TestSet; empty for constants.
  std::optional<TestSet> superlevel_set(double u) const;

  std::string describe() const;

 private:
  PlateauFunction(Kind kind, std::size_t dim, std::vector<double> normal, double level,
                  double width);

  Kind kind_;
  std::size_t dim_;
  std::vector<double> normal_;
  double level_;  // constant value, t, or r
  double width_;
};

}  // namespace isolab
