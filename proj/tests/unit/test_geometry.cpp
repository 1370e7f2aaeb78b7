#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/geometry.hpp"
#include "isolab/rng.hpp"
#include "isolab/sampling.hpp"

namespace isolab {
namespace {

TEST(Geometry, BallVolumes) {
  EXPECT_NEAR(ball_volume(2.0, 2).value, M_PI, 1e-12);
  EXPECT_NEAR(ball_volume(1.0, 2).value, 2.0, 1e-12);
  EXPECT_NEAR(ball_volume(2.0, 3).value, 4.0 * M_PI / 3.0, 1e-12);
  EXPECT_NEAR(ball_volume(1.0, 8).value, 256.0 / 40320.0, 1e-15);
  EXPECT_TRUE(std::isfinite(ball_volume(1.5, 5000).log_value));
}

TEST(Geometry, MarginalDensityOracles) {
  EXPECT_NEAR(marginal_density({2.0, 3}, 0.0), 0.75, 1e-12);
  EXPECT_NEAR(marginal_density({2.0, 2}, 0.0), 2.0 / M_PI, 1e-12);
  EXPECT_NEAR(marginal_density({1.3, 1}, 0.4), 0.5, 1e-12);
  for (double p : {1.0, 1.5, 2.0}) {
    for (int n : {1, 3, 9}) {
      const PBallParams params{p, n};
      EXPECT_NEAR(marginal_normalizer(params) / marginal_normalizer_quadrature(params), 1.0, 1e-9);
    }
  }
}

TEST(Geometry, MarginalTailAndQuantile) {
  const PBallParams params{1.5, 6};
  for (double a : {1e-6, 0.01, 0.25, 0.5}) {
    EXPECT_NEAR(marginal_sf(params, marginal_upper_quantile(params, a)) / a, 1.0, 1e-9);
  }
  EXPECT_NEAR(marginal_sf(params, 0.0), 0.5, 1e-14);
  EXPECT_NEAR(marginal_cdf(params, 0.3) + marginal_sf(params, 0.3), 1.0, 1e-14);
}

TEST(Geometry, SecondMoments) {
  for (double p : {1.0, 1.5, 2.0}) EXPECT_NEAR(marginal_second_moment({p, 1}), 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(marginal_second_moment({2.0, 2}), 0.25, 1e-10);
  EXPECT_NEAR(marginal_second_moment({2.0, 5}), 1.0 / 7.0, 1e-10);
}

TEST(Geometry, TestSetDistances) {
  const TestSet h = TestSet::half_space({0.6, 0.8}, 0.5);
  const std::vector<double> inside{1.0, 1.0}, outside{0.0, 0.0};
  EXPECT_TRUE(h.indicator(inside));
  EXPECT_DOUBLE_EQ(h.dist(inside), 0.0);
  EXPECT_NEAR(h.dist(outside), 0.5, 1e-15);
  EXPECT_NEAR(h.enlarged(0.2).offset(), 0.3, 1e-15);

  const TestSet c = TestSet::euclid_complement(2, 0.5);
  const std::vector<double> centre{0.1, 0.0};
  EXPECT_NEAR(c.dist(centre), 0.4, 1e-15);
  EXPECT_NEAR(c.enlarged(0.1).radius(), 0.4, 1e-15);
}

TEST(Geometry, AnalyticBoundaries) {
  const TestSet h = TestSet::coordinate_half_space(2, 0, 0.0);
  EXPECT_NEAR(*h.analytic_boundary({2.0, 2}), 2.0 / M_PI, 1e-12);
  EXPECT_NEAR(*h.analytic_measure({2.0, 2}), 0.5, 1e-12);
  const TestSet c = TestSet::euclid_complement(3, 0.5);
  EXPECT_NEAR(*c.analytic_measure({2.0, 3}), 1.0 - 0.125, 1e-12);
  EXPECT_NEAR(*c.analytic_boundary({2.0, 3}), 3.0 * 0.25, 1e-12);
  EXPECT_FALSE(c.analytic_boundary({1.5, 3}).has_value());
}

TEST(Geometry, JacobianAgainstFiniteDifferences) {
  const PBallParams params{1.5, 8};
  const SampleBatch batch = sample_product(params, 20, 11);
  std::vector<double> zp(9), zm(9);
  for (std::size_t i = 0; i < batch.count; ++i) {
    const auto z = batch.row(i);
    const JacobianResult jac = jacobian_T(z, params.p);
    double worst = 0.0;
    for (std::size_t col = 0; col < 9; ++col) {
      std::copy(z.begin(), z.end(), zp.begin());
      std::copy(z.begin(), z.end(), zm.begin());
      const double h = 1e-6 * std::max(1.0, std::abs(z[col]));
      zp[col] += h;
      zm[col] -= h;
      const auto tp = bgmn_map(zp, params.p);
      const auto tm = bgmn_map(zm, params.p);
      for (std::size_t row = 0; row < 8; ++row) {
        worst = std::max(worst, std::abs((tp[row] - tm[row]) / (2.0 * h) -
                                         jac.matrix(static_cast<Eigen::Index>(row),
                                                    static_cast<Eigen::Index>(col))));
      }
    }
    EXPECT_LT(worst / jac.matrix.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Geometry, OperatorNormThreeWays) {
  for (double p : {1.0, 1.25, 1.5, 2.0}) {
    const SampleBatch batch = sample_product({p, 6}, 50, 3);
    for (std::size_t i = 0; i < batch.count; ++i) {
      const JacobianResult jac = jacobian_T(batch.row(i), p);
      const JacobianNorms fast = jacobian_norms(batch.row(i), p);
      EXPECT_NEAR(fast.op_norm / operator_norm_svd(jac.matrix), 1.0, 1e-10);
      // Power iteration converges slowly when the top singular values are close.
      EXPECT_NEAR(operator_norm_power(jac.matrix) / jac.op_norm, 1.0, 1e-6);
      EXPECT_TRUE(jac.within_bound());
      EXPECT_LE(fast.op_norm, fast.pointwise_bound + 1e-9);
    }
  }
}

TEST(Geometry, AdjointMatchesTranspose) {
  const SampleBatch batch = sample_product({1.25, 4}, 5, 8);
  Rng rng(4);
  for (std::size_t i = 0; i < batch.count; ++i) {
    std::vector<double> v(4), out(5);
    for (double& x : v) x = rng.normal();
    jacobian_adjoint_apply(batch.row(i), 1.25, v, out);
    const Eigen::MatrixXd m = jacobian_T(batch.row(i), 1.25).matrix;
    const Eigen::VectorXd expect = m.transpose() * Eigen::Map<const Eigen::VectorXd>(v.data(), 4);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(out[static_cast<std::size_t>(j)], expect(j), 1e-12);
  }
}

TEST(Geometry, JacobianRejectsSingularAndKinks) {
  const std::vector<double> zero(3, 0.0);
  EXPECT_THROW(jacobian_T(zero, 1.5), SingularInputError);
  const std::vector<double> kink{0.0, 0.5, 0.5};
  EXPECT_THROW(jacobian_T(kink, 1.5), KinkError);
  EXPECT_NO_THROW(jacobian_T(kink, 2.0));
}

TEST(Geometry, InnerCutoffGradientOnRamp) {
  for (double p : {1.0, 1.5, 2.0}) {
    const PBallParams params{p, 16};
    const CutoffParams c{0.5, 1.0};
    const double scale = std::pow(16.0, params.radius_exponent());
    // Midway along the ramp, 1.5 / (c1 n^r) from the origin.
    std::vector<double> x(16, 0.0), g(16);
    x[3] = 1.5 / (c.c1 * scale);
    EXPECT_NEAR(cutoff_h1(x, params, c), 0.5, 1e-12);
    EXPECT_NEAR(cutoff_h1_gradient(x, params, c, g), c.c1 * scale, 1e-12);
    x[3] = 0.5 / (c.c1 * scale);
    EXPECT_DOUBLE_EQ(cutoff_h1(x, params, c), 1.0);
    EXPECT_DOUBLE_EQ(cutoff_h1_gradient(x, params, c, g), 0.0);
  }
}

TEST(Geometry, OuterCutoffPlateaus) {
  const PBallParams params{2.0, 4};
  const CutoffParams c{1.0, 1.0};
  std::vector<double> z(5, 0.0), g(5);
  z[0] = 1.9;
  EXPECT_DOUBLE_EQ(cutoff_h2(z, params, c), 0.0);
  z[0] = 4.1;
  EXPECT_DOUBLE_EQ(cutoff_h2(z, params, c), 1.0);
  z[0] = 3.0;
  EXPECT_NEAR(cutoff_h2(z, params, c), 0.5, 1e-15);
  EXPECT_NEAR(cutoff_h2_gradient(z, params, c, g), 0.5, 1e-12);
}

TEST(Geometry, PlateauFunctions) {
  const PlateauFunction ramp = PlateauFunction::half_space_ramp({1.0, 0.0}, 0.4, 0.2);
  const std::vector<double> top{0.5, 0.0}, mid{0.3, 0.0}, low{0.1, 0.0};
  EXPECT_DOUBLE_EQ(ramp.value(top), 1.0);
  EXPECT_DOUBLE_EQ(ramp.value(low), 0.0);
  EXPECT_NEAR(ramp.value(mid), 0.5, 1e-12);
  EXPECT_NEAR(ramp.grad_norm(mid), 5.0, 1e-12);
  EXPECT_NEAR(ramp.superlevel_set(0.5)->offset(), 0.3, 1e-12);
  EXPECT_FALSE(PlateauFunction::constant(2, 0.0).superlevel_set(0.5).has_value());
  EXPECT_THROW(PlateauFunction::radial_ramp(2, 0.1, 0.2), DomainError);

  // Finite differences agree with the analytic gradient off the kinks.
  const PlateauFunction radial = PlateauFunction::radial_ramp(3, 0.6, 0.3);
  const std::vector<double> x{0.3, 0.2, 0.2};
  ScalarField numeric{radial.as_field().value, {}};
  EXPECT_NEAR(grad_norm(numeric, x), radial.grad_norm(x), 1e-6);
}

TEST(Geometry, FiniteDifferenceGradientTakesLargerSideAtKinks) {
  const ScalarField abs_x{[](std::span<const double> x) { return std::abs(x[0]); }, {}};
  const std::vector<double> origin{0.0};
  EXPECT_NEAR(grad_norm(abs_x, origin), 1.0, 1e-9);
}

}  // namespace
}  // namespace isolab
