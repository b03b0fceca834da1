#pragma once

// Per-client simulation state and local training.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cefl/data.hpp"
#include "cefl/error.hpp"
#include "cefl/model.hpp"

namespace cefl {

struct EpisodeRecord {
  /// Mean training loss over the episode's mini-batches.
  double loss = 0.0;
  /// Fraction of training samples classified correctly while training.
  double accuracy = 0.0;
};

struct ClientState {
  std::size_t id = 0;
  ClientShard shard;
  ModelParams model;
  AdamState optimizer;
  std::vector<EpisodeRecord> history;
  std::uint64_t episodes_run = 0;
  bool warned_empty = false;

  static ClientState create(std::size_t id, ClientShard shard, ModelParams initial);

  /// Restarts the Adam moments; used whenever parameters are overwritten.
  void reset_optimizer() { optimizer = AdamState::for_model(model); }
};

/// Runs `episodes` passes over the training shard in shuffled mini-batches.
/// The shuffle of episode e derives from (cfg.seed, client id, e), so runs
/// are reproducible regardless of how episodes are grouped into calls. A
/// client without training data is skipped with one warning.
void train_episodes(ClientState& client, std::size_t episodes, const TrainConfig& cfg,
                    WarningLog* warnings = nullptr);

/// Accuracy of the client's current model on its test shard; NaN when the
/// test shard is empty.
double test_accuracy(const ClientState& client);

}  // namespace cefl
