#pragma once

// Experiment harness: declarative run configuration, validation with
// field-level diagnostics, and execution of protocols over seeds with all
// artifacts written to an output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cefl/data.hpp"
#include "cefl/flcore.hpp"
#include "cefl/model.hpp"

namespace cefl {

struct DatasetConfig {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  /// Synthetic only.
  std::size_t clients = 12;
  /// Synthetic only; empty selects flagship_profiles(clients, seed).
  std::vector<HeterogeneityProfile> profiles;
  /// Multiplies every profile's sample count (rounded, at least 1).
  double sample_scale = 1.0;
  SynthOptions synth;
  /// CSV only; relative paths resolve against the config file's directory.
  std::filesystem::path csv_path;
};

struct NamedProtocol {
  /// Unique label used for output directories; defaults to the protocol.
  std::string name;
  ProtocolConfig config;
};

struct RunConfig {
  DatasetConfig dataset;
  std::vector<LayerSpec> layers;
  TrainConfig train;
  std::vector<NamedProtocol> protocols;
  std::vector<std::uint64_t> seeds = {0};
  /// Cluster counts for a K sweep of the (first) cefl protocol; empty: off.
  std::vector<std::size_t> k_sweep;
  std::filesystem::path output_dir = "cefl_out";
};

/// 1200 -> 128 -> 64 -> 8 with relu, relu, softmax.
std::vector<LayerSpec> default_layers();

struct ConfigIssue {
  std::string field;
  std::string message;

  std::string text() const { return field.empty() ? message : field + ": " + message; }
};

struct ParsedConfig {
  RunConfig config;
  std::vector<ConfigIssue> issues;
};

/// Parses JSON config text. Syntax, type and unknown-key problems are
/// reported as issues rather than thrown; the returned config holds
/// defaults for anything that failed to parse.
ParsedConfig parse_run_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});

/// Reads and parses a config file. Throws std::runtime_error when the file
/// cannot be read.
ParsedConfig load_run_config(const std::filesystem::path& path);

/// Semantic checks (layer chain, training constants, per-protocol
/// constraints against N and L, seeds, sweep values). Reading a CSV dataset
/// to count its subjects is the only I/O.
std::vector<ConfigIssue> validate_run_config(const RunConfig& config);

/// Client count of the dataset without generating it (CSV is ingested).
std::size_t dataset_clients(const DatasetConfig& dataset);

/// Shards for one seed.
std::vector<ClientShard> build_dataset(const DatasetConfig& dataset, std::uint64_t seed,
                                       WarningLog* warnings = nullptr);

struct RunSummary {
  std::string name;
  Protocol protocol = Protocol::kCefl;
  std::uint64_t seed = 0;
  std::size_t rounds = 0;
  std::size_t episodes_per_round = 0;
  std::size_t local_episodes = 0;
  double final_mean_accuracy = 0.0;
  double final_std_accuracy = 0.0;
  std::uint64_t cost_bits = 0;
  std::filesystem::path directory;
};

struct ComparisonRow {
  std::string name;
  Protocol protocol = Protocol::kCefl;
  std::size_t rounds = 0;
  std::size_t episodes_per_round = 0;
  std::size_t local_episodes = 0;
  /// Mean over seeds of the final mean accuracy and of the across-client std.
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::uint64_t cost_bits = 0;
  /// 1 - cost / regular_fl cost, when a regular_fl run is present.
  std::optional<double> savings;
};

struct ExperimentReport {
  std::vector<RunSummary> runs;
  std::vector<ComparisonRow> comparison;
};

/// Runs every (protocol, seed) pair and the optional K sweep, writing
///   <out>/<name>_seed<s>/{metrics.csv, clients.csv, ledger.csv,
///                         ledger_summary.json, summary.json}
///   (cefl also clustering.json and graph.txt),
///   <out>/comparison.csv, <out>/comparison.txt, and <out>/ksweep.csv.
/// Progress lines go to `log` when given. Throws ConfigError when the
/// config does not validate.
ExperimentReport run_experiment(const RunConfig& config, std::ostream* log = nullptr);

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);
void write_comparison_text(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace cefl
