#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cefl/error.hpp"
#include "cefl/experiment.hpp"

namespace cefl {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kSmall = R"({
  "dataset": {"kind": "synthetic", "clients": 4, "sample_scale": 0.04},
  "protocols": [
    {"protocol": "individual", "individual_episodes": 2, "epsilon": 1},
    {"protocol": "regular_fl", "rounds": 4, "epsilon": 1},
    {"protocol": "fedper", "rounds": 2, "epsilon": 1},
    {"protocol": "cefl", "rounds": 2, "epsilon": 1, "clusters": 2, "eta": 2}
  ],
  "seeds": [0, 1],
  "k_sweep": [1, 3]
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cefl_experiment_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(RunConfigParse, DefaultsAndFields) {
  const ParsedConfig p = parse_run_config(kSmall);
  ASSERT_TRUE(p.issues.empty()) << p.issues[0].text();
  EXPECT_EQ(p.config.dataset.clients, 4u);
  EXPECT_EQ(p.config.protocols.size(), 4u);
  EXPECT_EQ(p.config.protocols[3].name, "cefl");
  EXPECT_EQ(p.config.protocols[3].config.clusters, 2u);
  EXPECT_EQ(p.config.layers.size(), 3u);
  EXPECT_TRUE(validate_run_config(p.config).empty());
}

TEST(RunConfigParse, UnknownKeyAndBadSyntax) {
  EXPECT_FALSE(parse_run_config(R"({"protocls": []})").issues.empty());
  EXPECT_FALSE(parse_run_config("{").issues.empty());
  EXPECT_FALSE(parse_run_config(R"({"seeds": "zero"})").issues.empty());
}

TEST(RunConfigValidate, BaseLayersOutOfRange) {
  ParsedConfig p = parse_run_config(
      R"({"dataset": {"clients": 4}, "protocols": [{"protocol": "cefl", "base_layers": 4}]})");
  ASSERT_TRUE(p.issues.empty());
  const auto issues = validate_run_config(p.config);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].text().find("1 <= B <= L"), std::string::npos);
  EXPECT_NE(issues[0].field.find("protocols[0]"), std::string::npos);
}

TEST(RunConfigValidate, LeaderWeightSum) {
  ParsedConfig p = parse_run_config(
      R"({"dataset": {"clients": 4},
          "protocols": [{"protocol": "cefl", "clusters": 2, "leader_weights": [0.5, 0.4]}]})");
  const auto issues = validate_run_config(p.config);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].text().find("weight normalization"), std::string::npos);
}

TEST(RunConfigValidate, DuplicateNamesAndSweepBounds) {
  ParsedConfig p = parse_run_config(
      R"({"dataset": {"clients": 3},
          "protocols": [{"protocol": "cefl"}, {"protocol": "cefl"}],
          "k_sweep": [4]})");
  EXPECT_GE(validate_run_config(p.config).size(), 2u);
}

TEST(RunExperiment, ArtifactsAndDeterminism) {
  RunConfig cfg = parse_run_config(kSmall).config;
  cfg.output_dir = scratch("a");
  const ExperimentReport a = run_experiment(cfg);
  EXPECT_EQ(a.runs.size(), 8u);
  EXPECT_EQ(a.comparison.size(), 4u);
  for (const RunSummary& r : a.runs) {
    for (const char* f : {"metrics.csv", "clients.csv", "ledger.csv", "ledger_summary.json",
                          "summary.json"}) {
      EXPECT_TRUE(fs::exists(r.directory / f)) << r.directory / f;
    }
  }
  EXPECT_TRUE(fs::exists(cfg.output_dir / "cefl_seed0" / "clustering.json"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "cefl_k3_seed1" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "comparison.csv"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "comparison.txt"));
  EXPECT_TRUE(fs::exists(cfg.output_dir / "ksweep.csv"));
  EXPECT_EQ(a.comparison[0].cost_bits, 0u);
  ASSERT_TRUE(a.comparison[3].savings.has_value());
  EXPECT_GT(*a.comparison[3].savings, 0.0);

  const fs::path first = cfg.output_dir;
  cfg.output_dir = scratch("b");
  run_experiment(cfg);
  for (const auto& entry : fs::recursive_directory_iterator(first)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), first);
    EXPECT_EQ(slurp(entry.path()), slurp(cfg.output_dir / rel)) << rel;
  }
  fs::remove_all(first);
  fs::remove_all(cfg.output_dir);
}

TEST(RunExperiment, InvalidConfigThrows) {
  RunConfig cfg = parse_run_config(kSmall).config;
  cfg.protocols[3].config.clusters = 9;
  cfg.output_dir = scratch("c");
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

}  // namespace
}  // namespace cefl
