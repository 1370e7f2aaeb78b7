#include "isolab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "isolab/errors.hpp"
#include "isolab/format.hpp"
#include "isolab/inequality_suite.hpp"
#include "isolab/rng.hpp"

namespace isolab {
namespace {

constexpr std::size_t kMinSamples = 1000;
const double kChainLevel = 0.25;
const double kEquivalenceLevel = 0.5;
const std::vector<double> kCurveLevels{0.4, 0.2, 0.1, 0.01, 0.001};
const std::vector<int> kIsotropyDims{1, 2, 4, 8, 16, 32, 64, 128};
const std::vector<double> kSmallSumShapes{1.0, 0.5};
const std::vector<int> kSmallSumTerms{4, 16};
const std::vector<double> kSmallSumEps{0.05, 0.1, 0.2};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config: cannot parse '" + text + "' for key '" + key + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<T>(key, item));
  return out;
}

std::string job_label(const std::string& check, double p, int n) {
  return check + "|" + format_double(p) + "|" + std::to_string(n);
}

std::vector<double> scaled(const std::vector<double>& multipliers, const PBallParams& params) {
  const double scale = std::pow(static_cast<double>(params.n), -params.radius_exponent());
  std::vector<double> out;
  for (double m : multipliers) out.push_back(m * scale);
  return out;
}

std::vector<double> below_half(const std::vector<double>& grid, bool inclusive) {
  std::vector<double> out;
  for (double a : grid) {
    if (inclusive ? a <= 0.5 : a < 0.5) out.push_back(a);
  }
  return out;
}

struct Job {
  std::string check;
  double p;
  int n;
  std::function<CheckResult(const SuiteOptions&)> body;
};

// The largest constant the coordinate half-spaces allow on this grid.
double fitted_isoperimetric_constant(const PBallParams& params, const std::vector<double>& a) {
  const CheckResult r = check_isoperimetric_order(params, a, SuiteOptions{});
  return r.fitted.at("c_lo");
}

std::vector<Job> plan_jobs(const RunConfig& cfg) {
  const auto selected = [&](const char* name) {
    return std::find(cfg.experiments.begin(), cfg.experiments.end(), name) !=
           cfg.experiments.end();
  };
  const std::vector<double> a_half = below_half(cfg.a_grid, true);
  const std::vector<double> a_open = below_half(cfg.a_grid, false);
  std::vector<Job> jobs;
  const auto per_pn = [&](const char* name, auto make) {
    if (!selected(name)) return;
    for (double p : cfg.p_grid) {
      for (int n : cfg.n_grid) {
        const PBallParams params{p, n};
        jobs.push_back({name, p, n,
                        [params, make](const SuiteOptions& o) { return make(params, o); }});
      }
    }
  };
  const auto with_ladder = [&](const PBallParams& params, SuiteOptions o) {
    o.eps_ladder = scaled(cfg.eps_ladder, params);
    return o;
  };

  per_pn("check_barthe_dimensional", [=](const PBallParams& pr, const SuiteOptions& o) {
    return check_barthe_dimensional(pr, cfg.a_grid, cfg.r_grid, with_ladder(pr, o));
  });
  per_pn("check_bobkov_inequality", [=](const PBallParams& pr, const SuiteOptions& o) {
    return check_bobkov_inequality(pr, cfg.a_grid, cfg.r_grid, with_ladder(pr, o));
  });
  per_pn("check_coarea", [=](const PBallParams& pr, const SuiteOptions& o) {
    const auto catalog = default_plateau_catalog(pr);
    return check_coarea(pr, catalog, with_ladder(pr, o));
  });
  per_pn("check_concentration_curve", [=](const PBallParams& pr, const SuiteOptions&) {
    const double c = fitted_isoperimetric_constant(pr, a_half);
    return check_concentration_curve(concentration_from_isoperimetry(c, pr.p, pr.n, kCurveLevels));
  });
  per_pn("check_cutoff_chain", [=](const PBallParams& pr, const SuiteOptions& o) {
    const PlateauFunction f = default_chain_function(pr, kChainLevel);
    return verify_cutoff_chain(pr, f, CutoffParams{cfg.c1, cfg.c2}, cfg.chain_C, o);
  });
  per_pn("check_functional_equivalence", [=](const PBallParams& pr, const SuiteOptions& o) {
    const TestSet set = coordinate_half_space_at(pr, kEquivalenceLevel);
    return check_functional_equivalence(pr, set, scaled(cfg.eps_ladder, pr), o);
  });
  per_pn("check_isoperimetric_order", [=](const PBallParams& pr, const SuiteOptions& o) {
    return check_isoperimetric_order(pr, a_half, with_ladder(pr, o), true);
  });
  if (selected("check_isotropy_constants")) {
    for (double p : cfg.p_grid) {
      jobs.push_back({"check_isotropy_constants", p, 0,
                      [p](const SuiteOptions&) { return check_isotropy_constants(p, kIsotropyDims); }});
    }
  }
  per_pn("check_jacobian_bound", [](const PBallParams& pr, const SuiteOptions& o) {
    return check_jacobian_bound(pr, o);
  });
  per_pn("check_kls", [=](const PBallParams& pr, const SuiteOptions&) {
    return check_kls(pr, a_half);
  });
  per_pn("check_l2_form", [=](const PBallParams& pr, const SuiteOptions& o) {
    const double c = fitted_isoperimetric_constant(pr, a_half);
    return check_l2_form(pr, a_open, c, o);
  });
  per_pn("check_lipschitz_concentration", [=](const PBallParams& pr, const SuiteOptions& o) {
    CheckResult all;
    all.name = "check_lipschitz_concentration";
    for (auto kind : {LipschitzFunctional::Coordinate, LipschitzFunctional::Diagonal,
                      LipschitzFunctional::EuclideanNorm}) {
      all.append(check_lipschitz_concentration(pr, kind, cfg.t_grid, o));
    }
    return all;
  });
  per_pn("check_norm_tail", [=](const PBallParams& pr, const SuiteOptions& o) {
    std::vector<double> grid;
    for (double t : scaled(cfg.t_grid, pr)) {
      if (t <= 1.0) grid.push_back(t);
    }
    return check_norm_tail(pr, grid, o);
  });
  per_pn("check_paouris_tail", [](const PBallParams& pr, const SuiteOptions& o) {
    return check_paouris_tail(pr, {}, o);
  });
  if (selected("check_profile_comparison")) {
    for (double p : cfg.p_grid) {
      jobs.push_back({"check_profile_comparison", p, 1, [p, a = cfg.a_grid](const SuiteOptions&) {
                        return check_profile_comparison(p, a);
                      }});
    }
  }
  per_pn("check_product_isoperimetry", [=](const PBallParams& pr, const SuiteOptions&) {
    return check_product_isoperimetry(pr, a_half);
  });
  per_pn("check_pushforward", [](const PBallParams& pr, const SuiteOptions& o) {
    return check_pushforward(pr, o);
  });
  per_pn("check_radius_calibration", [](const PBallParams& pr, const SuiteOptions& o) {
    return check_radius_calibration(pr, o);
  });
  if (selected("check_small_sum_bound")) {
    for (double shape : kSmallSumShapes) {
      for (int terms : kSmallSumTerms) {
        jobs.push_back({"check_small_sum_bound", shape, terms,
                        [shape, terms](const SuiteOptions& o) {
                          return check_small_sum_bound(shape, terms, kSmallSumEps, o.samples,
                                                       o.seed);
                        }});
      }
    }
  }
  return jobs;
}

// A job whose parameters fall outside a check's domain yields one
// INCONCLUSIVE record instead of aborting the run.
CheckResult skipped(const Job& job, const std::string& why) {
  CheckResult r;
  r.name = job.check;
  InequalityReport rep;
  rep.check = job.check;
  rep.p = job.p;
  rep.n = job.n;
  rep.param1 = std::numeric_limits<double>::quiet_NaN();
  rep.descriptor = "skipped";
  rep.lhs = exact_value(std::numeric_limits<double>::quiet_NaN());
  rep.rhs = std::numeric_limits<double>::quiet_NaN();
  rep.verdict = Verdict::Inconclusive;
  rep.note = why;
  r.reports.push_back(rep);
  return r;
}

CheckResult scoped(CheckResult r, const Job& job) {
  std::map<std::string, double> fitted;
  for (const auto& [key, value] : r.fitted) {
    fitted[key + "@p=" + format_double(job.p) + ",n=" + std::to_string(job.n)] = value;
  }
  r.fitted = std::move(fitted);
  return r;
}

}  // namespace

void RunConfig::validate() const {
  if (experiments.empty()) throw ConfigError("no experiments selected");
  for (const auto& name : experiments) {
    if (!is_known_check(name)) throw ConfigError("unknown check name: " + name);
  }
  const auto nonempty = [](bool empty, const char* key) {
    if (empty) throw ConfigError(std::string("config: ") + key + " must not be empty");
  };
  nonempty(p_grid.empty(), "p_grid");
  nonempty(n_grid.empty(), "n_grid");
  nonempty(a_grid.empty(), "a_grid");
  nonempty(t_grid.empty(), "t_grid");
  nonempty(r_grid.empty(), "r_grid");
  nonempty(eps_ladder.empty(), "eps_ladder");
  for (double p : p_grid) {
    if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("config: p_grid entries must lie in [1, 2]");
  }
  for (int n : n_grid) {
    if (n < 1) throw ConfigError("config: n_grid entries must be >= 1");
  }
  for (double a : a_grid) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("config: a_grid entries must lie in (0, 1)");
  }
  const auto positive = [](const std::vector<double>& v, const char* key) {
    for (double x : v) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw ConfigError(std::string("config: ") + key + " entries must be positive");
      }
    }
  };
  positive(t_grid, "t_grid");
  positive(r_grid, "r_grid");
  positive(eps_ladder, "eps_ladder");
  if (samples < kMinSamples) throw ConfigError("config: samples must be >= 1000");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
  if (!(c1 > 0.0 && c2 > 0.0 && chain_C > 0.0)) {
    throw ConfigError("config: c1, c2 and chain_C must be positive");
  }
}

RunConfig default_config() {
  RunConfig cfg;
  for (const auto& info : list_checks()) cfg.experiments.push_back(info.name);
  return cfg;
}

RunConfig parse_config(std::istream& in, RunConfig cfg) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "experiments") {
      cfg.experiments = split_list(value);
    } else if (key == "p_grid") {
      cfg.p_grid = parse_list<double>(key, value);
    } else if (key == "n_grid") {
      cfg.n_grid = parse_list<int>(key, value);
    } else if (key == "a_grid") {
      cfg.a_grid = parse_list<double>(key, value);
    } else if (key == "t_grid") {
      cfg.t_grid = parse_list<double>(key, value);
    } else if (key == "r_grid") {
      cfg.r_grid = parse_list<double>(key, value);
    } else if (key == "eps_ladder") {
      cfg.eps_ladder = parse_list<double>(key, value);
    } else if (key == "samples") {
      cfg.samples = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "threads") {
      cfg.threads = parse_number<unsigned>(key, value);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "c1") {
      cfg.c1 = parse_number<double>(key, value);
    } else if (key == "c2") {
      cfg.c2 = parse_number<double>(key, value);
    } else if (key == "chain_C") {
      cfg.chain_C = parse_number<double>(key, value);
    } else {
      throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, std::move(base));
}

const std::vector<CheckInfo>& list_checks() {
  static const std::vector<CheckInfo> catalog = {
      {"check_barthe_dimensional", "isoperimetry",
       "dimensional lower bound on half-space boundary measure from small Euclidean balls"},
      {"check_bobkov_inequality", "isoperimetry",
       "entropy lower bound on half-space boundary measure from small Euclidean balls"},
      {"check_coarea", "functional", "integral of |grad phi| against the level-set boundary measures"},
      {"check_concentration_curve", "concentration",
       "numerically integrated concentration curve against its closed-form bound"},
      {"check_cutoff_chain", "cutoff", "paired link-by-link check of the cut-off argument"},
      {"check_functional_equivalence", "functional",
       "distance-ramp gradients and their ladder limit against the exact boundary"},
      {"check_isoperimetric_order", "isoperimetry",
       "coordinate half-space boundary against n^{1/p} a log^{1-1/p}(1/a)"},
      {"check_isotropy_constants", "isotropy", "volume-one scaling and isotropic constant across n"},
      {"check_jacobian_bound", "jacobian",
       "operator norm of the push-forward derivative against its pointwise bound"},
      {"check_kls", "isotropy", "rescaled half-space boundary against a / L"},
      {"check_l2_form", "functional", "quadratic gradient lower bound for plateau ramps"},
      {"check_lipschitz_concentration", "concentration",
       "deviation from the median for 1-Lipschitz functionals"},
      {"check_norm_tail", "concentration", "Euclidean norm tail exp(-c n t^p)"},
      {"check_paouris_tail", "isotropy", "large-deviation tail of the rescaled Euclidean norm"},
      {"check_product_isoperimetry", "profiles",
       "one-dimensional profiles of the product factors against the comparison shape"},
      {"check_profile_comparison", "profiles", "two-sided profile comparison constants"},
      {"check_pushforward", "sampling",
       "push-forward sampler against the exact marginal and a rejection sampler"},
      {"check_radius_calibration", "concentration",
       "radius tail and small-ball probabilities along a constant ladder"},
      {"check_small_sum_bound", "small-ball", "small-sum probability of i.i.d. variables"},
  };
  return catalog;
}

bool is_known_check(const std::string& name) {
  const auto& c = list_checks();
  return std::any_of(c.begin(), c.end(), [&](const CheckInfo& i) { return i.name == name; });
}

RunOutcome run(const RunConfig& config, std::ostream& log) {
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir)) {
    throw ConfigError("cannot create output directory: " + config.out_dir);
  }

  const std::vector<Job> jobs = plan_jobs(config);
  std::vector<CheckResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      SuiteOptions options;
      options.samples = config.samples;
      options.seed = derive_seed(config.seed, stable_hash(job_label(job.check, job.p, job.n).c_str()));
      try {
        results[i] = scoped(job.body(options), job);
      } catch (const DomainError& e) {
        results[i] = skipped(job, e.what());
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      log << "done " << job_label(job.check, job.p, job.n) << '\n';
    }
  };
  const unsigned workers =
      std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunOutcome outcome;
  for (const auto& info : list_checks()) {
    CheckResult merged;
    merged.name = info.name;
    bool any = false;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].check != info.name) continue;
      merged.append(results[i]);
      any = true;
    }
    if (any) outcome.results.push_back(std::move(merged));
  }

  const auto write = [&](const fs::path& path, const auto& emit) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    emit(out);
    if (!out) throw ConfigError("cannot write " + path.string());
    outcome.files.push_back(path.string());
  };
  for (const auto& result : outcome.results) {
    write(fs::path(config.out_dir) / (result.name + ".csv"),
          [&](std::ostream& o) { write_report_csv(result, o); });
    write(fs::path(config.out_dir) / (result.name + "_plot.csv"),
          [&](std::ostream& o) { write_plot_data(result, o); });
  }
  write(fs::path(config.out_dir) / "summary.json",
        [&](std::ostream& o) { o << summary_json(outcome.results); });

  std::size_t fails = 0;
  for (const auto& r : outcome.results) fails += r.count(Verdict::Fail);
  outcome.exit_code = fails == 0 ? kExitOk : kExitFail;
  return outcome;
}

}  // namespace isolab
