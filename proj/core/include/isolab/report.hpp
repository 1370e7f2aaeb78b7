#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isolab/montecarlo.hpp"

namespace isolab {

/// One verification record.
struct InequalityReport {
  std::string check;
  double p = 2.0;
  int n = 1;
  double param1 = 0.0;  // the grid coordinate (a, t, r, eps, ...)
  double param2 = std::numeric_limits<double>::quiet_NaN();
  std::string descriptor;  // set / function / link label
  EstimateCI lhs;
  double rhs = 0.0;
  double rhs_stderr = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> fitted_constant;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;  // RARE, VACUOUS, ...
};

/// Fills ratio = lhs.mean / rhs when rhs > 0.
void set_ratio(InequalityReport& r);

/// All records produced by one check, plus named fitted constants.
struct CheckResult {
  std::string name;
  std::vector<InequalityReport> reports;
  std::map<std::string, double> fitted;

  std::size_t count(Verdict v) const;
  void append(const CheckResult& other);
};

void write_report_csv(const CheckResult& result, std::ostream& out);
/// Columns x, lhs, rhs, ci_lo, ci_hi, keyed on param1.
void write_plot_data(const CheckResult& result, std::ostream& out);
/// JSON summary: fitted constants and verdict counts per check.
std::string summary_json(const std::vector<CheckResult>& results);

}  // namespace isolab
