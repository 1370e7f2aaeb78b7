#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "isolab/errors.hpp"
#include "isolab/runner.hpp"

namespace isolab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("isolab_runner_test_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_config(const fs::path& out) {
  std::istringstream text(
      "experiments = check_kls, check_norm_tail, check_small_sum_bound  # three checks\n"
      "p_grid = 1, 2\n"
      "n_grid = 2, 4\n"
      "samples = 2000\n");
  RunConfig cfg = parse_config(text);
  cfg.out_dir = out.string();
  return cfg;
}

TEST(Runner, ParsesGrammar) {
  std::istringstream text(
      "# comment line\n"
      "\n"
      "experiments = check_kls,check_coarea\n"
      "p_grid = 1, 1.25 ,2\n"
      "seed = 18446744073709551615\n"
      "out_dir = /tmp/x y\n"
      "c1 = 0.5 # trailing comment\n");
  const RunConfig cfg = parse_config(text);
  EXPECT_EQ(cfg.experiments, (std::vector<std::string>{"check_kls", "check_coarea"}));
  EXPECT_EQ(cfg.p_grid, (std::vector<double>{1.0, 1.25, 2.0}));
  EXPECT_EQ(cfg.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.out_dir, "/tmp/x y");
  EXPECT_DOUBLE_EQ(cfg.c1, 0.5);
  EXPECT_EQ(cfg.n_grid, default_config().n_grid);
}

TEST(Runner, RejectsMalformedInput) {
  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(parse_config(unknown), ConfigError);
  std::istringstream no_equals("samples 100\n");
  EXPECT_THROW(parse_config(no_equals), ConfigError);
  std::istringstream bad_number("samples = 1e5x\n");
  EXPECT_THROW(parse_config(bad_number), ConfigError);
}

TEST(Runner, ValidationMessages) {
  RunConfig cfg = default_config();
  cfg.experiments.clear();
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "no experiments selected");
  }
  cfg = default_config();
  cfg.experiments = {"check_nothing"};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.samples = 999;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.p_grid = {2.5};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.a_grid.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Runner, CatalogIsSortedAndComplete) {
  const auto& checks = list_checks();
  EXPECT_GE(checks.size(), 13u);
  EXPECT_TRUE(std::is_sorted(checks.begin(), checks.end(),
                             [](const CheckInfo& a, const CheckInfo& b) { return a.name < b.name; }));
  for (const auto& c : checks) {
    EXPECT_EQ(c.name.rfind("check_", 0), 0u);
    EXPECT_FALSE(c.topic.empty());
    EXPECT_FALSE(c.description.empty());
  }
  EXPECT_TRUE(is_known_check("check_isoperimetric_order"));
}

TEST(Runner, WritesReportsAndSummary) {
  const fs::path out = scratch("files");
  std::ostringstream log;
  const RunOutcome outcome = run(small_config(out), log);
  EXPECT_EQ(outcome.exit_code, kExitOk);
  EXPECT_EQ(outcome.results.size(), 3u);
  for (const char* name : {"check_kls", "check_norm_tail", "check_small_sum_bound"}) {
    EXPECT_TRUE(fs::exists(out / (std::string(name) + ".csv")));
    EXPECT_EQ(slurp(out / (std::string(name) + "_plot.csv")).substr(0, 21), "x,lhs,rhs,ci_lo,ci_hi");
  }
  const std::string summary = slurp(out / "summary.json");
  EXPECT_NE(summary.find("\"totals\""), std::string::npos);
  EXPECT_NE(summary.find("c0@p=2,n=4"), std::string::npos);
}

TEST(Runner, SingleThreadedRunsAreByteIdentical) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  std::ostringstream log;
  run(small_config(a), log);
  run(small_config(b), log);
  RunConfig threaded = small_config(c);
  threaded.threads = 3;
  run(threaded, log);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(c / name)) << name;
  }
}

TEST(Runner, SeedChangesOutput) {
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  std::ostringstream log;
  run(small_config(a), log);
  RunConfig other = small_config(b);
  other.seed = 2;
  run(other, log);
  EXPECT_NE(slurp(a / "check_norm_tail.csv"), slurp(b / "check_norm_tail.csv"));
}

TEST(Runner, UnwritableOutputDirectory) {
  const fs::path file = scratch("blocker");
  std::ofstream(file.string()) << "x";
  RunConfig cfg = small_config(file / "sub");
  std::ostringstream log;
  EXPECT_THROW(run(cfg, log), ConfigError);
}

}  // namespace
}  // namespace isolab
