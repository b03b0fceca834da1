// cefl_sim: run or validate an experiment configuration.
//
//   cefl_sim run <config.json> [--seed-override S] [--out-dir DIR]
//   cefl_sim validate <config.json>
//
// Exit codes: 0 success, 1 I/O or runtime failure, 2 invalid configuration.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cefl/error.hpp"
#include "cefl/experiment.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;

int report_issues(const std::vector<cefl::ConfigIssue>& issues) {
  for (const cefl::ConfigIssue& i : issues) std::cerr << "error: " << i.text() << '\n';
  return issues.empty() ? 0 : kExitInvalid;
}

int validate(const std::string& path) {
  const cefl::ParsedConfig parsed = cefl::load_run_config(path);
  if (!parsed.issues.empty()) return report_issues(parsed.issues);
  const int rc = report_issues(cefl::validate_run_config(parsed.config));
  if (rc == 0) std::cout << path << ": ok\n";
  return rc;
}

int run(const std::string& path, std::optional<std::uint64_t> seed_override,
        const std::string& out_dir) {
  cefl::ParsedConfig parsed = cefl::load_run_config(path);
  if (!parsed.issues.empty()) return report_issues(parsed.issues);
  cefl::RunConfig& config = parsed.config;
  if (seed_override) config.seeds = {*seed_override};
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (int rc = report_issues(cefl::validate_run_config(config)); rc != 0) return rc;

  const cefl::ExperimentReport report = cefl::run_experiment(config, &std::cerr);
  cefl::write_comparison_text(report.comparison, std::cout);
  std::cout << "outputs written to " << config.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered, communication-efficient federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;

  CLI::App* run_cmd = app.add_subcommand("run", "Run every protocol and seed in a config");
  run_cmd->add_option("config", config_path, "Path to the JSON run configuration")->required();
  CLI::Option* seed_opt =
      run_cmd->add_option("--seed-override", seed, "Run only this seed instead of the list");
  run_cmd->add_option("--out-dir", out_dir, "Output directory (overrides output_dir)");

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("config", config_path, "Path to the JSON run configuration")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      return run(config_path, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt,
                 out_dir);
    }
    return validate(config_path);
  } catch (const cefl::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
