#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/inequality_suite.hpp"

namespace isolab {
namespace {

SuiteOptions options(std::size_t samples, std::uint64_t seed = 1) {
  SuiteOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

std::size_t fails(const CheckResult& r) { return r.count(Verdict::Fail); }

const InequalityReport& find(const CheckResult& r, const std::string& descriptor) {
  const auto it = std::find_if(r.reports.begin(), r.reports.end(),
                               [&](const InequalityReport& x) { return x.descriptor == descriptor; });
  EXPECT_NE(it, r.reports.end()) << descriptor;
  return *it;
}

TEST(IsoperimetricOrder, ClosedFormRatios) {
  const std::vector<double> half{0.5};
  const CheckResult interval = check_isoperimetric_order({1.0, 1}, half, {});
  EXPECT_NEAR(interval.reports[0].lhs.mean, 0.5, 1e-12);
  EXPECT_NEAR(interval.reports[0].rhs, 0.5, 1e-12);
  EXPECT_NEAR(interval.reports[0].ratio, 1.0, 1e-12);

  const CheckResult disc = check_isoperimetric_order({2.0, 2}, half, {});
  const double rhs = std::sqrt(2.0) * 0.5 * std::sqrt(std::log(2.0));
  EXPECT_NEAR(disc.reports[0].lhs.mean, 2.0 / M_PI, 1e-12);
  EXPECT_NEAR(disc.reports[0].rhs, rhs, 1e-12);
  EXPECT_NEAR(disc.reports[0].ratio, 1.0813895, 1e-6);
}

TEST(IsoperimetricOrder, PositiveAndBounded) {
  std::vector<double> grid;
  for (int k = 0; k < 25; ++k) grid.push_back(1e-3 * std::pow(500.0, k / 24.0));
  for (double p : {1.0, 1.5, 2.0}) {
    const CheckResult r = check_isoperimetric_order({p, 16}, grid, {});
    EXPECT_EQ(fails(r), 0u);
    EXPECT_GT(r.fitted.at("c_lo"), 0.0);
    EXPECT_LE(r.fitted.at("band"), 50.0);
  }
  const std::vector<double> bad{0.6};
  EXPECT_THROW(check_isoperimetric_order({2.0, 2}, bad, {}), DomainError);
}

TEST(IsoperimetricOrder, OtherSetsAreRecordedOnly) {
  const std::vector<double> grid{0.5, 0.25};
  const CheckResult r = check_isoperimetric_order({1.5, 3}, grid, options(50000), true);
  EXPECT_GT(r.reports.size(), 2u);
  EXPECT_EQ(fails(r), 0u);
}

TEST(Bobkov, ClosedFormRhsOnDisc) {
  const std::vector<double> half{0.5}, r{1.0};
  const CheckResult res = check_bobkov_inequality({2.0, 2}, half, r, options(200000));
  ASSERT_EQ(res.reports.size(), 1u);
  EXPECT_NEAR(res.reports[0].rhs, 0.5 * std::log(2.0), 1e-12);
  EXPECT_EQ(res.reports[0].verdict, Verdict::Pass);
}

TEST(Barthe, ClosedFormRhs) {
  const std::vector<double> half{0.5}, r{1.0};
  for (int n : {2, 3}) {
    const CheckResult res = check_barthe_dimensional({2.0, n}, half, r, options(200000));
    EXPECT_NEAR(res.reports[0].rhs, n / 2.0 * (std::pow(2.0, 1.0 / n) - 1.0), 1e-12);
    EXPECT_EQ(res.reports[0].verdict, Verdict::Pass);
  }
}

TEST(Barthe, UniformIntervalHalfLines) {
  const std::vector<double> a{0.5, 0.2, 0.05}, r{0.25, 0.5, 1.0};
  const CheckResult res = check_barthe_dimensional({1.0, 1}, a, r, options(100000));
  for (const auto& rep : res.reports) {
    if (std::isnan(rep.rhs)) continue;
    EXPECT_LE(rep.rhs, 0.5 + 1e-12);
    EXPECT_NE(rep.verdict, Verdict::Fail);
  }
}

TEST(NormTail, ExactRadialLawAndFit) {
  const std::vector<double> t{0.5, 0.7, 0.8, 0.9};
  const CheckResult r = check_norm_tail({2.0, 4}, t, options(100000));
  EXPECT_EQ(fails(r), 0u);
  EXPECT_GT(r.fitted.at("c_tail"), 0.0);
  std::size_t exact = 0;
  for (const auto& rep : r.reports) {
    if (rep.descriptor == "exact_radial_tail") {
      ++exact;
      EXPECT_EQ(rep.verdict, Verdict::Pass);
    }
  }
  EXPECT_EQ(exact, t.size());
}

TEST(NormTail, CrossPolytopeNeverReachesUnitRadius) {
  const std::vector<double> t{1.0};
  const CheckResult r = check_norm_tail({1.0, 16}, t, options(20000));
  EXPECT_DOUBLE_EQ(r.reports[0].lhs.mean, 0.0);
  EXPECT_EQ(r.reports[0].verdict, Verdict::Inconclusive);
}

TEST(LipschitzConcentration, MedianAndFit) {
  for (double p : {1.0, 2.0}) {
    for (int n : {8, 32}) {
      const CheckResult r =
          check_lipschitz_concentration({p, n}, LipschitzFunctional::EuclideanNorm, {}, options(50000));
      EXPECT_EQ(fails(r), 0u);
      EXPECT_GT(r.fitted.at("c_l2_norm"), 0.0);
      EXPECT_LE(find(r, "l2_norm:phi0").lhs.mean, 0.5);
    }
  }
}

TEST(LipschitzConcentration, CoordinateMatchesMarginal) {
  const CheckResult r =
      check_lipschitz_concentration({1.5, 4}, LipschitzFunctional::Coordinate, {}, options(100000));
  EXPECT_EQ(fails(r), 0u);
  std::size_t exact = 0;
  for (const auto& rep : r.reports) exact += rep.descriptor == "coordinate:exact_marginal";
  EXPECT_GT(exact, 3u);
}

TEST(ConcentrationCurve, StartsAtZeroAndMatchesClosedForm) {
  const std::vector<double> u{0.5, 0.4, 0.1, 0.01};
  const ConcentrationCurve one = concentration_from_isoperimetry(0.7, 1.0, 5, u);
  EXPECT_DOUBLE_EQ(one.psi_numeric[0], 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_NEAR(one.psi_numeric[i], std::log(1.0 / (2.0 * u[i])) / (0.7 * 5.0), 1e-12);
  }
  const std::vector<double> v{0.4, 0.1, 0.01};
  const ConcentrationCurve two = concentration_from_isoperimetry(1.0, 2.0, 4, v);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LE(two.psi_numeric[i], two.psi_closed_form[i]);
  EXPECT_EQ(fails(check_concentration_curve(two)), 0u);
  const std::vector<double> bad{0.0};
  EXPECT_THROW(concentration_from_isoperimetry(1.0, 2.0, 4, bad), DomainError);
}

TEST(ProductIsoperimetry, DimensionFree) {
  const std::vector<double> a{0.5, 0.3, 0.1, 0.01, 0.001};
  const CheckResult two = check_product_isoperimetry({1.0, 2}, a);
  const CheckResult many = check_product_isoperimetry({1.0, 64}, a);
  EXPECT_EQ(two.fitted.at("c"), many.fitted.at("c"));
  for (const auto& rep : two.reports) {
    if (rep.descriptor == "coordinate_1") EXPECT_NEAR(rep.ratio, 1.0, 1e-10);
  }
}

TEST(SmallSum, ConstantAndBound) {
  EXPECT_NEAR(small_sum_constant(1.0, 0.0), std::exp(1.0), 1e-12);
  EXPECT_NEAR(small_sum_constant(1.0 / std::sqrt(M_PI), 0.5), 2.0 * std::exp(1.0), 1e-12);
  const std::vector<double> eps{0.1};
  const CheckResult r = check_small_sum_bound(1.0, 4, eps, 100000, 3);
  const InequalityReport& bound = r.reports[0];
  EXPECT_NEAR(bound.rhs, std::pow(std::exp(1.0) * 0.1, 4.0), 1e-15);
  EXPECT_NEAR(bound.rhs, 5.46e-3, 1e-5);
  EXPECT_EQ(fails(r), 0u);
}

TEST(SmallSum, VacuousBoundStillPasses) {
  const std::vector<double> eps{0.5};
  const CheckResult r = check_small_sum_bound(1.0, 4, eps, 2000, 3);
  EXPECT_EQ(r.reports[0].note, "VACUOUS");
  EXPECT_EQ(r.reports[0].verdict, Verdict::Pass);
}

TEST(RadiusCalibration, MonotoneLadderWithoutFailures) {
  const CheckResult r = check_radius_calibration({1.0, 8}, options(50000));
  EXPECT_EQ(fails(r), 0u);
  EXPECT_EQ(find(r, "monotone_in_C2").verdict, Verdict::Pass);
  std::size_t sum_bound = 0;
  for (const auto& rep : r.reports) sum_bound += rep.descriptor == "small_ball:sum_bound";
  EXPECT_EQ(sum_bound, 7u);
}

TEST(Coarea, CatalogAndConstant) {
  const PBallParams params{2.0, 2};
  const auto catalog = default_plateau_catalog(params);
  const CheckResult r = check_coarea(params, catalog, options(100000));
  EXPECT_EQ(fails(r), 0u);
  const InequalityReport& constant = r.reports.back();
  EXPECT_DOUBLE_EQ(constant.lhs.mean, 0.0);
  EXPECT_DOUBLE_EQ(constant.rhs, 0.0);
}

TEST(FunctionalEquivalence, PlateauStructure) {
  const PBallParams params{1.5, 3};
  const TestSet set = coordinate_half_space_at(params, 0.3);
  const CheckResult r = check_functional_equivalence(params, set, {}, options(50000));
  EXPECT_EQ(find(r, "plateau_structure").verdict, Verdict::Pass);
  EXPECT_EQ(fails(r), 0u);
}

TEST(L2Form, RampOracleAndPreconditions) {
  const PBallParams params{2.0, 4};
  const std::vector<double> a{0.25};
  const CheckResult r = check_l2_form(params, a, 0.5, options(200000));
  const double t = marginal_upper_quantile(params, 0.25);
  const double w = 0.5 * t;
  const double zone = marginal_sf(params, t - w) - marginal_sf(params, t);
  EXPECT_NEAR(r.reports[0].lhs.mean, zone / (w * w), 3.0 * r.reports[0].lhs.std_err);
  EXPECT_GE(r.reports[0].lhs.mean, 0.0);

  const auto masses = plateau_masses(params, PlateauFunction::constant(4, 0.0));
  EXPECT_DOUBLE_EQ(masses->one, 0.0);
  const PlateauFunction zero = PlateauFunction::constant(4, 0.0);
  EXPECT_THROW(verify_cutoff_chain(params, zero, {}, 1.0, options(1000)), DomainError);
}

TEST(CutoffChain, DefaultConstantsHold) {
  const PBallParams params{2.0, 4};
  const PlateauFunction f = default_chain_function(params, 0.25);
  const CheckResult r = verify_cutoff_chain(params, f, {0.25, 8.0}, 1.0, options(100000));
  EXPECT_EQ(fails(r), 0u);
  EXPECT_EQ(find(r, "plateau_mass>=a/2").verdict, Verdict::Pass);
  EXPECT_EQ(find(r, "gradient_transfer_pointwise").verdict, Verdict::Pass);
}

TEST(CutoffChain, UnitConstantsLinksHold) {
  const PBallParams params{2.0, 4};
  const PlateauFunction f = default_chain_function(params, 0.25);
  const CheckResult r = verify_cutoff_chain(params, f, {1.0, 1.0}, 1.0, options(100000));
  for (const auto& rep : r.reports) {
    if (rep.descriptor.rfind("link:", 0) == 0) EXPECT_NE(rep.verdict, Verdict::Fail) << rep.descriptor;
  }
}

TEST(Isotropy, ClosedForms) {
  for (double p : {1.0, 1.5, 2.0}) {
    const IsotropyConstants k = isotropy_constants(p, 1);
    EXPECT_NEAR(k.scale, 0.5, 1e-12);
    EXPECT_NEAR(k.sigma2, 1.0 / 3.0, 1e-10);
  }
  EXPECT_NEAR(isotropy_constants(2.0, 2).sigma2, 0.25, 1e-10);
  const std::vector<int> dims{1, 2, 4, 8, 16, 32, 64, 128};
  for (double p : {1.0, 1.5, 2.0}) EXPECT_EQ(fails(check_isotropy_constants(p, dims)), 0u);
}

TEST(Kls, BandAndGrowth) {
  const std::vector<double> a{0.5, 0.25, 0.1, 0.01, 0.001};
  double lo = 1e300, hi = 0.0;
  for (int n : {2, 8, 32}) {
    const double c0 = check_kls({2.0, n}, a).fitted.at("c0");
    lo = std::min(lo, c0);
    hi = std::max(hi, c0);
  }
  EXPECT_LE(hi / lo, 5.0);
  const CheckResult one = check_kls({1.0, 16}, a);
  for (std::size_t i = 1; i < one.reports.size(); ++i) {
    EXPECT_GT(one.reports[i].ratio, one.reports[i - 1].ratio);
  }
}

TEST(Paouris, PositiveConstant) {
  const CheckResult r = check_paouris_tail({1.0, 16}, {}, options(100000));
  EXPECT_EQ(fails(r), 0u);
  EXPECT_GT(r.fitted.at("c"), 0.0);
  const std::vector<double> below{0.5};
  EXPECT_THROW(check_paouris_tail({1.0, 16}, below, options(1000)), DomainError);
}

TEST(JacobianBound, NoViolations) {
  for (double p : {1.0, 1.25, 2.0}) {
    const CheckResult r = check_jacobian_bound({p, 8}, options(10000));
    EXPECT_EQ(fails(r), 0u) << p;
  }
}

TEST(Pushforward, AgreesWithOracles) {
  const CheckResult r = check_pushforward({1.5, 3}, options(100000));
  EXPECT_EQ(fails(r), 0u);
  EXPECT_LT(find(r, "ks_vs_rejection").lhs.mean, kPushforwardKsLimit);
}

}  // namespace
}  // namespace isolab
