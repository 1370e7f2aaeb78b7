// Acceptance suite. Each criterion prints one line:
//   criterion <k> <name>: PASS|FAIL <details>
// Usage: acceptance [k ...]   (no arguments runs all eleven)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "isolab/errors.hpp"
#include "isolab/inequality_suite.hpp"
#include "isolab/measures1d.hpp"
#include "isolab/montecarlo.hpp"
#include "isolab/runner.hpp"
#include "isolab/sampling.hpp"

using namespace isolab;

namespace {

// Pinned tolerances and budgets.
constexpr double kKsLimit = 0.015;
constexpr double kPushforwardSeconds = 120.0;
constexpr double kLaplaceProfileTol = 1e-10;
constexpr double kWeibullProfileTol = 1e-8;
constexpr double kFiniteDifferenceTol = 1e-6;
constexpr double kJacobianSeconds = 60.0;
constexpr double kOrderBand = 50.0;
constexpr double kOrderSeconds = 10.0;
constexpr double kBoundarySeconds = 300.0;
constexpr double kCurveSlack = 1e-6;
constexpr double kClosedFormTol = 1e-10;
constexpr double kConstantTol = 1e-12;
constexpr double kLadderTol = 0.03;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream details;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details << " [failed: " << what << "]";
    }
  }
};

SuiteOptions options(std::size_t samples, std::uint64_t seed) {
  SuiteOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

std::string pn(const PBallParams& params) {
  std::ostringstream s;
  s << "p=" << params.p << ",n=" << params.n;
  return s.str();
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int k = 0; k < points; ++k) g.push_back(lo * std::pow(hi / lo, k / double(points - 1)));
  return g;
}

Outcome pushforward() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  for (double p : {1.0, 1.5, 2.0}) {
    for (int n : {2, 4, 8}) {
      const PBallParams params{p, n};
      const SampleBatch ball = sample_ball(params, 100000, 101);
      const SampleBatch rej = rejection_sample_ball(params, 100000, 202);
      for (std::size_t j = 0; j < ball.dim; ++j) {
        const double ks = ks_two_sample(ball.column(j), rej.column(j));
        worst = std::max(worst, ks);
        o.require(ks < kKsLimit, pn(params) + " coordinate " + std::to_string(j + 1));
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < kPushforwardSeconds, "runtime");
  o.details << "max_ks=" << worst << " limit=" << kKsLimit << " runtime_s=" << elapsed;
  return o;
}

Outcome exact_profiles() {
  Outcome o;
  const LogConcave1D mu = make_mu_p(1.0);
  double laplace = 0.0;
  for (int k = 1; k <= 99; ++k) {
    const double a = k / 100.0;
    laplace = std::max(laplace, std::abs(bobkov_profile(mu, a).value - std::min(a, 1.0 - a)));
  }
  o.require(laplace <= kLaplaceProfileTol, "mu_1 profile");
  double weibull = 0.0;
  for (double p : {1.0, 1.5, 2.0}) {
    const LogConcave1D nu = make_nu_p(p);
    const auto density = [p](double t) {
      return p * std::pow(t, p - 1.0) * std::exp(-std::pow(t, p));
    };
    for (int k = 1; k <= 99; ++k) {
      const double a = k / 100.0;
      const double lower = std::pow(-std::log1p(-a), 1.0 / p);
      const double upper = std::pow(-std::log(a), 1.0 / p);
      weibull = std::max(weibull, std::abs(bobkov_profile(nu, a).value -
                                           std::min(density(lower), density(upper))));
    }
  }
  o.require(weibull <= kWeibullProfileTol, "nu_p profile");
  o.details << "mu_1_max_err=" << laplace << " nu_p_max_err=" << weibull;
  return o;
}

Outcome jacobian() {
  Outcome o;
  const auto start = Clock::now();
  double fd = 0.0, worst_ratio = 0.0;
  std::size_t violations = 0;
  for (double p : {1.0, 1.25, 1.5, 2.0}) {
    for (int n : {2, 8, 32, 64}) {
      const CheckResult r = check_jacobian_bound({p, n}, options(10000, 303));
      violations += static_cast<std::size_t>(r.reports[0].lhs.mean);
      fd = std::max(fd, r.fitted.at("fd_rel_error"));
      worst_ratio = std::max(worst_ratio, r.fitted.at("max_op_over_bound"));
    }
  }
  const double elapsed = seconds_since(start);
  o.require(violations == 0, "bound violations");
  o.require(fd < kFiniteDifferenceTol, "finite differences");
  o.require(elapsed < kJacobianSeconds, "runtime");
  o.details << "violations=" << violations << " max_op_over_bound=" << worst_ratio
            << " fd_rel_error=" << fd << " runtime_s=" << elapsed;
  return o;
}

Outcome order_sharpness() {
  Outcome o;
  const auto start = Clock::now();
  const auto grid = log_grid(1e-3, 0.5, 25);
  double lo = INFINITY, hi = 0.0;
  bool positive = true;
  for (double p : {1.0, 1.5, 2.0}) {
    for (int n : {4, 16, 64}) {
      const CheckResult r = check_isoperimetric_order({p, n}, grid, {});
      for (const auto& rep : r.reports) {
        positive = positive && rep.ratio > 0.0;
        lo = std::min(lo, rep.ratio);
        hi = std::max(hi, rep.ratio);
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(positive, "positive ratios");
  o.require(hi / lo <= kOrderBand, "band");
  o.require(elapsed < kOrderSeconds, "runtime");
  o.details << "ratio_min=" << lo << " ratio_max=" << hi << " band=" << hi / lo
            << " runtime_s=" << elapsed;
  return o;
}

Outcome bobkov_barthe() {
  Outcome o;
  const auto start = Clock::now();
  const std::vector<double> a{0.5, 0.25, 0.1, 0.05, 0.01};
  const std::vector<double> r{0.5, 1.0, 2.0};
  std::size_t reports = 0, fails = 0, inconclusive = 0;
  for (double p : {1.0, 2.0}) {
    for (int n : {2, 4, 8}) {
      for (const CheckResult& res :
           {check_bobkov_inequality({p, n}, a, r, options(1000000, 404)),
            check_barthe_dimensional({p, n}, a, r, options(1000000, 505))}) {
        reports += res.reports.size();
        fails += res.count(Verdict::Fail);
        inconclusive += res.count(Verdict::Inconclusive);
        for (const auto& rep : res.reports) {
          if (rep.verdict == Verdict::Fail) o.details << " FAIL@" << res.name << "," << pn({p, n});
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(fails == 0, "FAIL verdicts");
  o.require(elapsed < kBoundarySeconds, "runtime");
  o.details << "reports=" << reports << " fail=" << fails << " inconclusive=" << inconclusive
            << " runtime_s=" << elapsed;
  return o;
}

Outcome tail_constants() {
  Outcome o;
  double c_min = INFINITY, c1_min = INFINITY;
  std::size_t exact = 0, exact_pass = 0;
  for (double p : {1.0, 1.5, 2.0}) {
    for (int n : {2, 8, 32}) {
      const PBallParams params{p, n};
      const CheckResult tail = check_norm_tail(params, {}, options(100000, 606));
      const double c = tail.fitted.at("c_tail");
      o.require(c > 0.0, "c_tail at " + pn(params));
      c_min = std::min(c_min, c);
      for (const auto& rep : tail.reports) {
        if (rep.descriptor != "exact_radial_tail") continue;
        ++exact;
        exact_pass += rep.verdict == Verdict::Pass;
      }
      for (auto f : {LipschitzFunctional::Coordinate, LipschitzFunctional::Diagonal,
                     LipschitzFunctional::EuclideanNorm}) {
        const CheckResult conc = check_lipschitz_concentration(params, f, {}, options(100000, 707));
        const double c1 = conc.fitted.at("c_" + to_string(f));
        o.require(c1 > 0.0, "c1 " + to_string(f) + " at " + pn(params));
        c1_min = std::min(c1_min, c1);
      }
    }
  }
  o.require(exact > 0 && exact == exact_pass, "exact radial tail");
  o.details << "min_c=" << c_min << " min_c1=" << c1_min << " exact_tail_agree=" << exact_pass
            << "/" << exact;
  return o;
}

Outcome concentration_curve() {
  Outcome o;
  const std::vector<double> u{0.4, 0.2, 0.1, 0.01, 0.001};
  double worst_excess = -INFINITY, closed_err = 0.0;
  std::size_t curves = 0;
  for (double p : {1.0, 1.5, 2.0}) {
    for (int n : {4, 16, 64}) {
      const std::vector<double> a = log_grid(1e-3, 0.5, 25);
      const double fitted = check_isoperimetric_order({p, n}, a, {}).fitted.at("c_lo");
      for (double c : {fitted, 1.0}) {
        const ConcentrationCurve curve = concentration_from_isoperimetry(c, p, n, u);
        ++curves;
        for (std::size_t i = 0; i < u.size(); ++i) {
          const double bound = curve.psi_closed_form[i] * (1.0 + kCurveSlack);
          worst_excess = std::max(worst_excess, curve.psi_numeric[i] / curve.psi_closed_form[i] - 1.0);
          o.require(curve.psi_numeric[i] <= bound, "curve bound");
          if (p == 1.0) {
            const double exact = std::log(1.0 / (2.0 * u[i])) / (c * n);
            closed_err = std::max(closed_err, std::abs(curve.psi_numeric[i] - exact));
          }
        }
      }
    }
  }
  o.require(closed_err <= kClosedFormTol, "p=1 closed form");
  o.details << "curves=" << curves << " max_relative_excess=" << worst_excess
            << " p1_closed_form_err=" << closed_err;
  return o;
}

Outcome small_sums() {
  Outcome o;
  const std::vector<double> eps{0.05, 0.1, 0.2};
  std::size_t fails = 0, exact = 0, exact_pass = 0, vacuous = 0;
  for (double shape : {1.0, 0.5}) {
    for (int terms : {4, 16}) {
      const CheckResult r = check_small_sum_bound(shape, terms, eps, 100000, 808 + terms);
      fails += r.count(Verdict::Fail);
      for (const auto& rep : r.reports) {
        vacuous += rep.note == "VACUOUS" && rep.descriptor.find(":bound") != std::string::npos;
        if (rep.descriptor.find(":exact_law") == std::string::npos) continue;
        ++exact;
        exact_pass += rep.verdict == Verdict::Pass;
      }
    }
  }
  const double c = small_sum_constant(1.0, 0.0);
  o.require(fails == 0, "FAIL verdicts");
  o.require(exact == exact_pass, "exact Erlang law");
  o.require(std::abs(c - std::exp(1.0)) <= kConstantTol, "C(1,0) = e");
  o.details << "fail=" << fails << " exact_agree=" << exact_pass << "/" << exact
            << " vacuous=" << vacuous << " C(1,0)-e=" << c - std::exp(1.0);
  return o;
}

Outcome cutoff_chain() {
  Outcome o;
  const PBallParams params{2.0, 4};
  const PlateauFunction f = default_chain_function(params, 0.25);
  const CheckResult r = verify_cutoff_chain(params, f, CutoffParams{1.0, 1.0}, 1.0,
                                            options(1000000, 909));
  std::size_t links = 0;
  for (const auto& rep : r.reports) {
    if (rep.descriptor.rfind("link:", 0) == 0 || rep.descriptor == "gradient_transfer_pointwise") {
      ++links;
      o.require(rep.verdict != Verdict::Fail, rep.descriptor);
    }
    if (rep.descriptor == "plateau_mass>=a/2") {
      o.require(rep.verdict != Verdict::Fail, "plateau mass");
      o.details << "plateau_mass=" << rep.lhs.mean << "+-" << rep.lhs.std_err
                << " a/2=" << rep.rhs << " ";
    }
  }
  o.details << "links=" << links << " error_budget_used=" << r.fitted.at("error_budget_used");
  return o;
}

Outcome coarea_equivalence() {
  Outcome o;
  std::size_t coarea = 0, coarea_pass = 0;
  for (double p : {1.0, 1.5, 2.0}) {
    for (int n : {2, 4}) {
      const PBallParams params{p, n};
      const auto catalog = default_plateau_catalog(params);
      const CheckResult r = check_coarea(params, catalog, options(200000, 1001));
      for (const auto& rep : r.reports) {
        ++coarea;
        coarea_pass += rep.verdict == Verdict::Pass;
      }
    }
  }
  o.require(coarea == coarea_pass, "coarea verdicts");
  const PBallParams disc{2.0, 2};
  const TestSet set = coordinate_half_space_at(disc, 0.5);
  const CheckResult eq = check_functional_equivalence(disc, set, {}, options(1000000, 1002));
  const double limit = eq.fitted.at("ladder_limit");
  const double rel = std::abs(limit - 2.0 / M_PI) / (2.0 / M_PI);
  o.require(rel <= kLadderTol, "ladder limit");
  for (const auto& rep : eq.reports) {
    if (rep.descriptor == "plateau_structure") o.require(rep.verdict == Verdict::Pass, "plateau");
  }
  o.details << "coarea_pass=" << coarea_pass << "/" << coarea << " ladder_limit=" << limit
            << " target=" << 2.0 / M_PI << " rel_err=" << rel;
  return o;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "isolab_acceptance_determinism";
  fs::remove_all(root);
  std::vector<fs::path> dirs{root / "first", root / "second"};
  std::ostringstream log;
  int exit_code = 0;
  for (const auto& dir : dirs) {
    RunConfig cfg = default_config();
    cfg.threads = 1;
    cfg.out_dir = dir.string();
    exit_code = std::max(exit_code, run(cfg, log).exit_code);
  }
  std::size_t csv = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++csv;
    identical += slurp(entry.path()) == slurp(dirs[1] / entry.path().filename());
  }
  o.require(csv > 0 && csv == identical, "byte-identical CSVs");
  o.details << "csv_files=" << csv << " identical=" << identical << " exit_code=" << exit_code;
  fs::remove_all(root);
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"pushforward_ks", pushforward},
      {"exact_profiles", exact_profiles},
      {"jacobian_bound", jacobian},
      {"isoperimetric_order_band", order_sharpness},
      {"bobkov_barthe_half_spaces", bobkov_barthe},
      {"tail_constants", tail_constants},
      {"concentration_curve", concentration_curve},
      {"small_sum_bound", small_sums},
      {"cutoff_chain_unit_constants", cutoff_chain},
      {"coarea_and_ladder", coarea_equivalence},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }
  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }
    const Criterion& c = criteria[static_cast<std::size_t>(k - 1)];
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.details << "exception: " << e.what();
    }
    std::cout << "criterion " << k << ' ' << c.name << ": " << (out.pass ? "PASS" : "FAIL") << ' '
              << out.details.str() << std::endl;
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
