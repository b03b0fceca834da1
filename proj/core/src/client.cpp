#include "cefl/client.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cefl/random.hpp"

namespace cefl {

ClientState ClientState::create(std::size_t id, ClientShard shard, ModelParams initial) {
  if (!shard.train.empty() && shard.train.dim() != initial.input_dim()) {
    throw InputError("client " + std::to_string(id) + ": feature dimension " +
                     std::to_string(shard.train.dim()) + " does not match model input " +
                     std::to_string(initial.input_dim()));
  }
  ClientState c;
  c.id = id;
  c.shard = std::move(shard);
  c.model = std::move(initial);
  c.reset_optimizer();
  return c;
}

void train_episodes(ClientState& client, std::size_t episodes, const TrainConfig& cfg,
                    WarningLog* warnings) {
  const Batch& data = client.shard.train;
  if (data.empty()) {
    if (episodes > 0 && !client.warned_empty && warnings) {
      warnings->push_back("client " + std::to_string(client.id) +
                          " has no training data; local training skipped");
    }
    client.warned_empty = true;
    return;
  }
  const std::uint64_t client_seed = derive_seed(cfg.seed, client.id);
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng rng(derive_seed(client_seed, client.episodes_run));
    const std::vector<std::size_t> order = rng.permutation(data.size());
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const Batch batch =
          data.subset(std::span<const std::size_t>(order.data() + start, stop - start));
      const LossAndGrads lg = loss_and_grads(client.model, batch);
      adam_step(client.model, lg.grads, client.optimizer, cfg);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      correct += lg.correct;
    }
    const double n = static_cast<double>(data.size());
    client.history.push_back({loss_sum / n, static_cast<double>(correct) / n});
    ++client.episodes_run;
  }
}

double test_accuracy(const ClientState& client) {
  if (client.shard.test.empty()) return std::numeric_limits<double>::quiet_NaN();
  return evaluate(client.model, client.shard.test);
}

}  // namespace cefl
