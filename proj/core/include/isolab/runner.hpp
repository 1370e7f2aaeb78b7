#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "isolab/report.hpp"

namespace isolab {

/// Run configuration. Grids named *_multipliers in the comments are scaled
/// per (p, n) by the checks that use them.
struct RunConfig {
  std::vector<std::string> experiments;  // empty selects nothing
  std::vector<double> p_grid{1.0, 1.5, 2.0};
  std::vector<int> n_grid{2, 4, 8};
  std::vector<double> a_grid{0.5, 0.25, 0.1, 0.05, 0.01};
  std::vector<double> t_grid{0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};  // multipliers
  std::vector<double> r_grid{0.5, 1.0, 2.0};                       // multipliers of n^{-(2-p)/(2p)}
  std::vector<double> eps_ladder{0.1, 0.05, 0.02, 0.01};           // multipliers, as r_grid
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir = "isolab_out";
  double c1 = 0.25;  // cut-off constants for check_cutoff_chain
  double c2 = 8.0;
  double chain_C = 1.0;

  /// Throws ConfigError on empty grids, unknown checks, or out-of-range values.
  void validate() const;
};

/// The default configuration: every check on small grids.
RunConfig default_config();

/// Parses `key = value` lines; lists are comma-separated and `#` starts a
/// comment. Keys not present keep their value from `base`.
RunConfig parse_config(std::istream& in, RunConfig base = default_config());
RunConfig load_config(const std::string& path, RunConfig base = default_config());

struct CheckInfo {
  std::string name;
  std::string topic;
  std::string description;
};

/// Alphabetized catalog of the available checks.
const std::vector<CheckInfo>& list_checks();
bool is_known_check(const std::string& name);

struct RunOutcome {
  std::vector<CheckResult> results;  // in catalog order
  std::vector<std::string> files;
  int exit_code = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 2;
inline constexpr int kExitConfig = 3;

/// Executes the selected checks and writes one CSV and one plot file per
/// check plus summary.json into out_dir. Throws ConfigError when the config
/// is invalid or out_dir cannot be written.
RunOutcome run(const RunConfig& config, std::ostream& log);

}  // namespace isolab
