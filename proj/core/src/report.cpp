#include "isolab/report.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"

#include "isolab/format.hpp"

namespace isolab {
namespace {

// Descriptors go into an unquoted CSV column.
std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '"') c = ';';
  }
  return s;
}

// JSON has no NaN or infinity; those become null.
nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

void set_ratio(InequalityReport& r) {
  r.ratio = r.rhs > 0.0 ? r.lhs.mean / r.rhs : std::numeric_limits<double>::quiet_NaN();
}

std::size_t CheckResult::count(Verdict v) const {
  std::size_t k = 0;
  for (const auto& r : reports) k += r.verdict == v ? 1 : 0;
  return k;
}

void CheckResult::append(const CheckResult& other) {
  reports.insert(reports.end(), other.reports.begin(), other.reports.end());
  for (const auto& [key, value] : other.fitted) fitted[key] = value;
}

void write_report_csv(const CheckResult& result, std::ostream& out) {
  out << "check,p,n,param1,param2,lhs,lhs_stderr,rhs,ratio,verdict,descriptor,fitted,note\n";
  for (const auto& r : result.reports) {
    out << r.check << ',' << format_double(r.p) << ',' << r.n << ',' << format_double(r.param1)
        << ',' << format_double(r.param2) << ',' << format_double(r.lhs.mean) << ','
        << format_double(r.lhs.std_err) << ',' << format_double(r.rhs) << ','
        << format_double(r.ratio) << ',' << to_string(r.verdict) << ','
        << csv_safe(r.descriptor) << ','
        << (r.fitted_constant ? format_double(*r.fitted_constant) : std::string()) << ','
        << csv_safe(r.note) << '\n';
  }
}

void write_plot_data(const CheckResult& result, std::ostream& out) {
  out << "x,lhs,rhs,ci_lo,ci_hi\n";
  for (const auto& r : result.reports) {
    out << format_double(r.param1) << ',' << format_double(r.lhs.mean) << ','
        << format_double(r.rhs) << ',' << format_double(r.lhs.lo()) << ','
        << format_double(r.lhs.hi()) << '\n';
  }
}

std::string summary_json(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json root;
  root["checks"] = nlohmann::ordered_json::array();
  std::size_t pass = 0, fail = 0, inconclusive = 0;
  for (const auto& result : results) {
    nlohmann::ordered_json entry;
    entry["name"] = result.name;
    entry["reports"] = result.reports.size();
    entry["pass"] = result.count(Verdict::Pass);
    entry["fail"] = result.count(Verdict::Fail);
    entry["inconclusive"] = result.count(Verdict::Inconclusive);
    nlohmann::ordered_json fitted = nlohmann::ordered_json::object();
    for (const auto& [key, value] : result.fitted) fitted[key] = number_or_null(value);
    entry["fitted"] = fitted;
    pass += result.count(Verdict::Pass);
    fail += result.count(Verdict::Fail);
    inconclusive += result.count(Verdict::Inconclusive);
    root["checks"].push_back(entry);
  }
  root["totals"] = {{"pass", pass}, {"fail", fail}, {"inconclusive", inconclusive}};
  return root.dump(2) + "\n";
}

}  // namespace isolab
