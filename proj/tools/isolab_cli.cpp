#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isolab/errors.hpp"
#include "isolab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"isolab: numerical checks of isoperimetric and concentration inequalities on l_p balls"};
  std::string config_path;
  std::vector<std::string> experiments;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::string out_dir;
  unsigned threads = 0;
  bool list = false;
  bool quiet = false;

  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiments, "check to run (repeatable; overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  auto* samples_opt = app.add_option("--samples", samples, "Monte Carlo samples per estimate");
  auto* out_opt = app.add_option("--out-dir", out_dir, "output directory (fallback: $LAB_OUT_DIR)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads");
  app.add_flag("--list", list, "list the available checks and exit");
  app.add_flag("-q,--quiet", quiet, "suppress progress lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : isolab::kExitConfig;
  }

  if (list) {
    for (const auto& info : isolab::list_checks()) {
      std::cout << std::left << std::setw(32) << info.name << std::setw(15) << info.topic
                << info.description << '\n';
    }
    return isolab::kExitOk;
  }

  try {
    isolab::RunConfig cfg = isolab::default_config();
    if (const char* env = std::getenv("LAB_OUT_DIR"); env != nullptr && *env != '\0') {
      cfg.out_dir = env;
    }
    if (!config_path.empty()) cfg = isolab::load_config(config_path, cfg);
    if (!experiments.empty()) cfg.experiments = experiments;
    if (*seed_opt) cfg.seed = seed;
    if (*samples_opt) cfg.samples = samples;
    if (*out_opt) cfg.out_dir = out_dir;
    if (*threads_opt) cfg.threads = threads;

    std::ostream null_stream(nullptr);
    const auto outcome = isolab::run(cfg, quiet ? null_stream : std::cerr);
    for (const auto& result : outcome.results) {
      std::cout << std::left << std::setw(32) << result.name
                << " pass=" << result.count(isolab::Verdict::Pass)
                << " fail=" << result.count(isolab::Verdict::Fail)
                << " inconclusive=" << result.count(isolab::Verdict::Inconclusive) << '\n';
    }
    std::cout << "wrote " << outcome.files.size() << " files to " << cfg.out_dir << '\n';
    return outcome.exit_code;
  } catch (const isolab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return isolab::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
