#pragma once

// Training protocols: Individual, Regular FL, FedPer and clustered FL with a
// leader-to-member transfer session.
//
// All federated protocols share one round structure: the server aggregates
// the participants' current base layers, broadcasts the result once, each
// participant overwrites its base layers and trains for `epsilon` episodes,
// then participants are evaluated on their test shards.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cefl/client.hpp"
#include "cefl/clustering.hpp"
#include "cefl/cost.hpp"
#include "cefl/data.hpp"
#include "cefl/model.hpp"
#include "cefl/similarity.hpp"

namespace cefl {

enum class Protocol { kIndividual, kRegularFl, kFedPer, kCefl };

std::string_view to_string(Protocol p);
/// Accepts "individual", "regular_fl", "fedper", "cefl". Throws ConfigError.
Protocol protocol_from_string(std::string_view name);

struct ProtocolConfig {
  Protocol protocol = Protocol::kCefl;
  /// K, leaders (cefl only).
  std::size_t clusters = 2;
  /// T, aggregation rounds.
  std::size_t rounds = 100;
  /// Local episodes per round; for individual training, episodes between
  /// metric rows.
  std::size_t epsilon = 8;
  /// Episodes every client trains before clustering.
  std::size_t epsilon_init = 1;
  /// Maximum fine-tuning episodes after transfer.
  std::size_t eta = 350;
  /// B, shared layers counted from the input. Defaults to L - 1 (at least 1).
  /// Regular FL always shares all layers.
  std::optional<std::size_t> base_layers;
  /// a_k, one per cluster leader. Defaults to 1/K each.
  std::vector<double> leader_weights;
  std::size_t individual_episodes = 350;
  /// Transfer fine-tuning stops after this many episodes without an
  /// improvement greater than min_delta in training accuracy.
  std::size_t patience = 10;
  double min_delta = 1e-3;
  unsigned bits_per_param = 32;

  std::size_t resolve_base_layers(std::size_t num_layers) const;
  std::vector<double> resolve_leader_weights() const;

  /// Every constraint violation as "field: message"; empty when valid.
  std::vector<std::string> diagnostics(std::size_t n_clients, std::size_t num_layers) const;
  /// Throws ConfigError listing the diagnostics.
  void validate(std::size_t n_clients, std::size_t num_layers) const;
};

struct RoundMetrics {
  std::size_t round = 0;
  double mean_accuracy = 0.0;
  /// Population standard deviation across clients.
  double std_accuracy = 0.0;
  std::uint64_t cumulative_bits = 0;
  /// NaN for clients without test data; those are left out of the mean.
  std::vector<double> client_accuracy;
};

struct TransferOptions {
  std::size_t eta = 350;
  std::size_t patience = 10;
  double min_delta = 1e-3;
};

struct RunResult {
  explicit RunResult(Protocol p, SizeModel sizes) : protocol(p), ledger(std::move(sizes)) {}

  Protocol protocol;
  std::vector<RoundMetrics> rounds;
  CostLedger ledger;
  std::vector<ModelParams> final_models;
  std::optional<SimilarityGraph> graph;
  std::optional<Clustering> clustering;
  /// Fine-tuning episodes run by each client after transfer (cefl).
  std::vector<std::size_t> transfer_episodes;
  /// Rounds x participants for which personalized layers were compared
  /// before and after aggregation and broadcast, and how many changed.
  std::size_t scope_checks = 0;
  std::size_t scope_violations = 0;
  WarningLog warnings;

  const RoundMetrics& final_metrics() const { return rounds.back(); }
};

/// Per-entry convex combination of the models over `range`. Throws
/// InputError when the weights are negative or do not sum to 1 +- 1e-9, or
/// when the models differ in structure.
std::vector<LayerParams> fedavg_aggregate(std::span<const ModelParams* const> models,
                                          std::span<const double> weights, LayerRange range);
std::vector<LayerParams> fedavg_aggregate(std::span<const ModelParams> models,
                                          std::span<const double> weights, LayerRange range);

/// Overwrites layers [0, base.size()) of m. Returns whether any value
/// changed. Throws InputError on a shape mismatch.
bool broadcast_base(std::span<const LayerParams> base, ModelParams& m);

/// |D_n| / |D| over training set sizes.
std::vector<double> data_size_weights(std::span<const ClientShard> shards);

/// Copies each leader's model to the other members of its cluster, meters
/// one full-model broadcast per leader, and fine-tunes the members. Returns
/// the fine-tuning episodes per client (0 for leaders).
std::vector<std::size_t> transfer_session(std::vector<ClientState>& clients,
                                          const Clustering& clustering, const TrainConfig& cfg,
                                          const TransferOptions& options, CostLedger& ledger,
                                          WarningLog* warnings = nullptr);

/// Trains one episode at a time until `eta` episodes or a plateau of
/// `patience` episodes. Returns the episodes run.
std::size_t fine_tune(ClientState& client, const TrainConfig& cfg,
                      const TransferOptions& options, WarningLog* warnings = nullptr);

/// Runs are pure functions of their arguments. All clients start from
/// init_model(specs, derived seed); the training seed in `train` is
/// replaced by one derived from `seed`.
RunResult run_individual(const ProtocolConfig& cfg, const TrainConfig& train,
                         std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                         std::uint64_t seed);
RunResult run_regular_fl(const ProtocolConfig& cfg, const TrainConfig& train,
                         std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                         std::uint64_t seed);
RunResult run_fedper(const ProtocolConfig& cfg, const TrainConfig& train,
                     std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                     std::uint64_t seed);
RunResult run_cefl(const ProtocolConfig& cfg, const TrainConfig& train,
                   std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                   std::uint64_t seed);
/// Dispatches on cfg.protocol.
RunResult run_protocol(const ProtocolConfig& cfg, const TrainConfig& train,
                       std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                       std::uint64_t seed);

/// round,protocol,mean_acc,std_acc,cumulative_cost_bits
void write_metrics_csv(const RunResult& result, std::ostream& out);
/// round,client,accuracy
void write_client_metrics_csv(const RunResult& result, std::ostream& out);

}  // namespace cefl
