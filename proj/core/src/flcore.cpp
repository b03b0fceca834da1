#include "cefl/flcore.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "cefl/random.hpp"

namespace cefl {
namespace {

constexpr double kWeightTolerance = 1e-9;

// Stream tags for seeds derived from the run seed.
constexpr std::uint64_t kInitTag = 0x696e6974;   // model initialisation
constexpr std::uint64_t kTrainTag = 0x74726e;    // shuffles
constexpr std::uint64_t kClusterTag = 0x636c73;  // Louvain visit order

struct Setup {
  std::size_t n = 0;
  std::size_t num_layers = 0;
  TrainConfig train;
  ModelParams initial;
};

Setup prepare(const ProtocolConfig& cfg, Protocol expected, const TrainConfig& train,
              std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
              std::uint64_t seed) {
  if (cfg.protocol != expected) {
    throw ConfigError("protocol: expected " + std::string(to_string(expected)) + ", got " +
                      std::string(to_string(cfg.protocol)));
  }
  if (shards.empty()) throw ConfigError("protocol run needs at least one client");
  validate_specs(specs);
  train.validate();
  cfg.validate(shards.size(), specs.size());
  Setup s;
  s.n = shards.size();
  s.num_layers = specs.size();
  s.train = train;
  s.train.seed = derive_seed(seed, kTrainTag);
  s.initial = init_model(specs, derive_seed(seed, kInitTag));
  return s;
}

std::vector<ClientState> make_clients(const Setup& s, std::span<const ClientShard> shards) {
  std::vector<ClientState> clients;
  clients.reserve(s.n);
  for (std::size_t i = 0; i < s.n; ++i) clients.push_back(ClientState::create(i, shards[i], s.initial));
  return clients;
}

RoundMetrics summarize(std::size_t round, std::vector<double> acc, std::uint64_t bits) {
  RoundMetrics m;
  m.round = round;
  m.cumulative_bits = bits;
  double sum = 0.0;
  std::size_t count = 0;
  for (double a : acc) {
    if (std::isnan(a)) continue;
    sum += a;
    ++count;
  }
  if (count == 0) {
    m.mean_accuracy = m.std_accuracy = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.mean_accuracy = sum / static_cast<double>(count);
    double var = 0.0;
    for (double a : acc) {
      if (!std::isnan(a)) var += (a - m.mean_accuracy) * (a - m.mean_accuracy);
    }
    m.std_accuracy = std::sqrt(var / static_cast<double>(count));
  }
  m.client_accuracy = std::move(acc);
  return m;
}

std::vector<double> evaluate_all(const std::vector<ClientState>& clients) {
  std::vector<double> acc;
  acc.reserve(clients.size());
  for (const ClientState& c : clients) acc.push_back(test_accuracy(c));
  return acc;
}

bool same_layers(const ModelParams& m, const std::vector<LayerParams>& saved, std::size_t from) {
  for (std::size_t l = from; l < m.num_layers(); ++l) {
    if (!(m.layer(l) == saved[l - from])) return false;
  }
  return true;
}

// One aggregation round over the given participants, followed by local
// training. Personalized layers [B, L) are snapshotted and compared to
// check that aggregation and broadcast left them alone.
void federated_round(std::vector<ClientState>& clients, std::span<const std::size_t> participants,
                     std::span<const double> weights, std::size_t base_layers,
                     std::size_t epsilon, const TrainConfig& train, RunResult& result) {
  std::vector<const ModelParams*> models;
  for (std::size_t p : participants) models.push_back(&clients[p].model);
  const LayerRange base{0, base_layers};
  const std::vector<LayerParams> global = fedavg_aggregate(models, weights, base);
  for (std::size_t p : participants) {
    result.ledger.record(CostPhase::kFlUpload, static_cast<std::int64_t>(p), kServer, base);
  }
  result.ledger.record(CostPhase::kFlBroadcast, kServer, kBroadcast, base);

  for (std::size_t p : participants) {
    ModelParams& m = clients[p].model;
    const std::vector<LayerParams> personal(m.layers().begin() + static_cast<long>(base_layers),
                                            m.layers().end());
    if (broadcast_base(global, m)) clients[p].reset_optimizer();
    if (!personal.empty()) {
      ++result.scope_checks;
      if (!same_layers(m, personal, base_layers)) ++result.scope_violations;
    }
  }
  for (std::size_t p : participants) {
    train_episodes(clients[p], epsilon, train, &result.warnings);
  }
}

void finish(RunResult& result, std::vector<ClientState>& clients) {
  for (ClientState& c : clients) result.final_models.push_back(std::move(c.model));
}

RunResult run_shared_rounds(const ProtocolConfig& cfg, Protocol expected, const TrainConfig& train,
                            std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                            std::uint64_t seed) {
  const Setup s = prepare(cfg, expected, train, specs, shards, seed);
  const std::size_t base_layers =
      expected == Protocol::kRegularFl ? s.num_layers : cfg.resolve_base_layers(s.num_layers);
  const std::vector<double> weights = data_size_weights(shards);

  RunResult result(expected, SizeModel::from_model(s.initial, cfg.bits_per_param));
  std::vector<ClientState> clients = make_clients(s, shards);
  std::vector<std::size_t> everyone(s.n);
  std::iota(everyone.begin(), everyone.end(), std::size_t{0});

  result.rounds.push_back(summarize(0, evaluate_all(clients), 0));
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    federated_round(clients, everyone, weights, base_layers, cfg.epsilon, s.train, result);
    result.rounds.push_back(summarize(t, evaluate_all(clients), result.ledger.total()));
  }
  finish(result, clients);
  return result;
}

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kIndividual:
      return "individual";
    case Protocol::kRegularFl:
      return "regular_fl";
    case Protocol::kFedPer:
      return "fedper";
    case Protocol::kCefl:
      return "cefl";
  }
  return "unknown";
}

Protocol protocol_from_string(std::string_view name) {
  if (name == "individual") return Protocol::kIndividual;
  if (name == "regular_fl") return Protocol::kRegularFl;
  if (name == "fedper") return Protocol::kFedPer;
  if (name == "cefl") return Protocol::kCefl;
  throw ConfigError("unknown protocol '" + std::string(name) +
                    "' (expected individual, regular_fl, fedper or cefl)");
}

std::size_t ProtocolConfig::resolve_base_layers(std::size_t num_layers) const {
  if (base_layers) return *base_layers;
  return num_layers > 1 ? num_layers - 1 : 1;
}

std::vector<double> ProtocolConfig::resolve_leader_weights() const {
  if (!leader_weights.empty()) return leader_weights;
  if (clusters == 0) return {};
  return std::vector<double>(clusters, 1.0 / static_cast<double>(clusters));
}

std::vector<std::string> ProtocolConfig::diagnostics(std::size_t n_clients,
                                                     std::size_t num_layers) const {
  std::vector<std::string> out;
  const std::string n_text = std::to_string(n_clients);
  const std::string l_text = std::to_string(num_layers);
  if (bits_per_param == 0) out.push_back("bits_per_param: must be positive");

  if (protocol == Protocol::kFedPer || protocol == Protocol::kCefl) {
    const std::size_t b = resolve_base_layers(num_layers);
    if (b < 1 || b > num_layers) {
      out.push_back("base_layers: B=" + std::to_string(b) + " violates 1 <= B <= L (L=" + l_text +
                    ")");
    } else if (protocol == Protocol::kFedPer && b >= num_layers) {
      out.push_back("base_layers: B=" + std::to_string(b) + " violates B < L (L=" + l_text +
                    "); sharing every layer is regular_fl");
    }
  }

  if (protocol == Protocol::kCefl) {
    if (clusters < 1 || clusters > n_clients) {
      out.push_back("clusters: K=" + std::to_string(clusters) + " violates 1 <= K <= N (N=" +
                    n_text + ")");
    }
    if (!leader_weights.empty()) {
      if (leader_weights.size() != clusters) {
        out.push_back("leader_weights: " + std::to_string(leader_weights.size()) +
                      " weights given for K=" + std::to_string(clusters) + " clusters");
      }
      double sum = 0.0;
      bool negative = false;
      for (double w : leader_weights) {
        sum += w;
        negative = negative || !(w >= 0.0);
      }
      if (negative) out.push_back("leader_weights: weights must be nonnegative");
      if (!(std::abs(sum - 1.0) <= kWeightTolerance)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", sum);
        out.push_back(std::string("leader_weights: sum ") + buf +
                      " violates weight normalization (must sum to 1 +- 1e-9)");
      }
    }
    if (patience < 1) out.push_back("patience: must be >= 1");
    if (!(min_delta >= 0.0)) out.push_back("min_delta: must be >= 0");
  }
  return out;
}

void ProtocolConfig::validate(std::size_t n_clients, std::size_t num_layers) const {
  const std::vector<std::string> diags = diagnostics(n_clients, num_layers);
  if (diags.empty()) return;
  std::string msg;
  for (const std::string& d : diags) msg += (msg.empty() ? "" : "; ") + d;
  throw ConfigError(msg);
}

std::vector<LayerParams> fedavg_aggregate(std::span<const ModelParams* const> models,
                                          std::span<const double> weights, LayerRange range) {
  if (models.empty()) throw InputError("fedavg_aggregate: no models");
  if (models.size() != weights.size()) {
    throw InputError("fedavg_aggregate: one weight per model required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("fedavg_aggregate: negative weight");
    sum += w;
  }
  if (!(std::abs(sum - 1.0) <= kWeightTolerance)) {
    throw InputError("fedavg_aggregate: weights sum to " + std::to_string(sum) + ", not 1");
  }
  const ModelParams& first = *models.front();
  if (range.begin >= range.end || range.end > first.num_layers()) {
    throw InputError("fedavg_aggregate: layer range outside the model");
  }
  for (const ModelParams* m : models) {
    if (!m->same_structure(first)) throw InputError("fedavg_aggregate: model structures differ");
  }

  std::vector<LayerParams> out;
  for (std::size_t l = range.begin; l < range.end; ++l) {
    LayerParams acc = first.layer(l);
    std::fill(acc.weights.begin(), acc.weights.end(), 0.0);
    std::fill(acc.bias.begin(), acc.bias.end(), 0.0);
    for (std::size_t i = 0; i < models.size(); ++i) {
      const LayerParams& src = models[i]->layer(l);
      const double w = weights[i];
      for (std::size_t e = 0; e < acc.weights.size(); ++e) acc.weights[e] += w * src.weights[e];
      for (std::size_t e = 0; e < acc.bias.size(); ++e) acc.bias[e] += w * src.bias[e];
    }
    out.push_back(std::move(acc));
  }
  return out;
}

std::vector<LayerParams> fedavg_aggregate(std::span<const ModelParams> models,
                                          std::span<const double> weights, LayerRange range) {
  std::vector<const ModelParams*> ptrs;
  for (const ModelParams& m : models) ptrs.push_back(&m);
  return fedavg_aggregate(std::span<const ModelParams* const>(ptrs), weights, range);
}

bool broadcast_base(std::span<const LayerParams> base, ModelParams& m) {
  if (base.size() > m.num_layers()) throw InputError("broadcast_base: more layers than the model");
  for (std::size_t l = 0; l < base.size(); ++l) {
    const LayerParams& dst = m.layer(l);
    if (!(base[l].spec == dst.spec) || base[l].weights.size() != dst.weights.size() ||
        base[l].bias.size() != dst.bias.size()) {
      throw InputError("broadcast_base: layer " + std::to_string(l + 1) + " shape mismatch");
    }
  }
  bool changed = false;
  for (std::size_t l = 0; l < base.size(); ++l) {
    LayerParams& dst = m.layer(l);
    if (dst == base[l]) continue;
    dst = base[l];
    changed = true;
  }
  return changed;
}

std::vector<double> data_size_weights(std::span<const ClientShard> shards) {
  std::uint64_t total = 0;
  for (const ClientShard& s : shards) total += s.train.size();
  if (total == 0) throw InputError("no client has training data");
  std::vector<double> w;
  for (const ClientShard& s : shards) {
    w.push_back(static_cast<double>(s.train.size()) / static_cast<double>(total));
  }
  return w;
}

std::size_t fine_tune(ClientState& client, const TrainConfig& cfg, const TransferOptions& options,
                      WarningLog* warnings) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::size_t run = 0;
  while (run < options.eta) {
    const std::size_t before = client.history.size();
    train_episodes(client, 1, cfg, warnings);
    if (client.history.size() == before) break;
    ++run;
    const double acc = client.history.back().accuracy;
    if (acc > best + options.min_delta) {
      best = acc;
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }
  return run;
}

std::vector<std::size_t> transfer_session(std::vector<ClientState>& clients,
                                          const Clustering& clustering, const TrainConfig& cfg,
                                          const TransferOptions& options, CostLedger& ledger,
                                          WarningLog* warnings) {
  if (clustering.assignment.size() != clients.size() ||
      clustering.leaders.size() != clustering.num_clusters()) {
    throw InputError("transfer_session: clustering does not match the clients");
  }
  std::vector<std::size_t> episodes(clients.size(), 0);
  const auto groups = clustering.clusters();
  for (std::size_t k = 0; k < groups.size(); ++k) {
    const std::size_t leader = clustering.leaders[k];
    ledger.record(CostPhase::kTransfer, static_cast<std::int64_t>(leader), kBroadcast,
                  clients[leader].model.all_layers());
    for (std::size_t member : groups[k]) {
      if (member == leader) continue;
      clients[member].model = clients[leader].model;
      clients[member].reset_optimizer();
      episodes[member] = fine_tune(clients[member], cfg, options, warnings);
    }
  }
  return episodes;
}

RunResult run_individual(const ProtocolConfig& cfg, const TrainConfig& train,
                         std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                         std::uint64_t seed) {
  const Setup s = prepare(cfg, Protocol::kIndividual, train, specs, shards, seed);
  RunResult result(Protocol::kIndividual, SizeModel::from_model(s.initial, cfg.bits_per_param));
  std::vector<ClientState> clients = make_clients(s, shards);

  result.rounds.push_back(summarize(0, evaluate_all(clients), 0));
  const std::size_t chunk = cfg.epsilon == 0 ? cfg.individual_episodes : cfg.epsilon;
  std::size_t done = 0;
  for (std::size_t row = 1; done < cfg.individual_episodes; ++row) {
    const std::size_t step = std::min(chunk, cfg.individual_episodes - done);
    for (ClientState& c : clients) train_episodes(c, step, s.train, &result.warnings);
    done += step;
    result.rounds.push_back(summarize(row, evaluate_all(clients), 0));
  }
  finish(result, clients);
  return result;
}

RunResult run_regular_fl(const ProtocolConfig& cfg, const TrainConfig& train,
                         std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                         std::uint64_t seed) {
  return run_shared_rounds(cfg, Protocol::kRegularFl, train, specs, shards, seed);
}

RunResult run_fedper(const ProtocolConfig& cfg, const TrainConfig& train,
                     std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                     std::uint64_t seed) {
  return run_shared_rounds(cfg, Protocol::kFedPer, train, specs, shards, seed);
}

RunResult run_cefl(const ProtocolConfig& cfg, const TrainConfig& train,
                   std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                   std::uint64_t seed) {
  const Setup s = prepare(cfg, Protocol::kCefl, train, specs, shards, seed);
  const std::size_t base_layers = cfg.resolve_base_layers(s.num_layers);
  const std::vector<double> weights = cfg.resolve_leader_weights();

  RunResult result(Protocol::kCefl, SizeModel::from_model(s.initial, cfg.bits_per_param));
  std::vector<ClientState> clients = make_clients(s, shards);

  // Pre-clustering training; every client uploads its full model.
  for (ClientState& c : clients) {
    train_episodes(c, cfg.epsilon_init, s.train, &result.warnings);
    result.ledger.record(CostPhase::kInitUpload, static_cast<std::int64_t>(c.id), kServer,
                         c.model.all_layers());
  }
  std::vector<double> accuracy = evaluate_all(clients);
  result.rounds.push_back(summarize(0, accuracy, result.ledger.total()));

  Clustering clustering;
  if (s.n == 1) {
    clustering.assignment = {0};
    clustering.leaders = {0};
  } else {
    std::vector<ModelParams> models;
    for (const ClientState& c : clients) models.push_back(c.model);
    result.graph = build_graph(models);
    clustering = cluster_clients(*result.graph, cfg.clusters, derive_seed(seed, kClusterTag),
                                 &result.warnings);
  }
  result.clustering = clustering;

  // Only leaders train and communicate; members keep their last evaluated
  // accuracy until transfer.
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    federated_round(clients, clustering.leaders, weights, base_layers, cfg.epsilon, s.train,
                    result);
    for (std::size_t leader : clustering.leaders) accuracy[leader] = test_accuracy(clients[leader]);
    result.rounds.push_back(summarize(t, accuracy, result.ledger.total()));
  }

  result.transfer_episodes = transfer_session(
      clients, clustering, s.train, {cfg.eta, cfg.patience, cfg.min_delta}, result.ledger,
      &result.warnings);
  result.rounds.push_back(
      summarize(cfg.rounds + 1, evaluate_all(clients), result.ledger.total()));
  finish(result, clients);
  return result;
}

RunResult run_protocol(const ProtocolConfig& cfg, const TrainConfig& train,
                       std::span<const LayerSpec> specs, std::span<const ClientShard> shards,
                       std::uint64_t seed) {
  switch (cfg.protocol) {
    case Protocol::kIndividual:
      return run_individual(cfg, train, specs, shards, seed);
    case Protocol::kRegularFl:
      return run_regular_fl(cfg, train, specs, shards, seed);
    case Protocol::kFedPer:
      return run_fedper(cfg, train, specs, shards, seed);
    case Protocol::kCefl:
      return run_cefl(cfg, train, specs, shards, seed);
  }
  throw InternalError("unhandled protocol");
}

void write_metrics_csv(const RunResult& result, std::ostream& out) {
  out << "round,protocol,mean_acc,std_acc,cumulative_cost_bits\n";
  char buf[128];
  for (const RoundMetrics& m : result.rounds) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", m.mean_accuracy, m.std_accuracy);
    out << m.round << ',' << to_string(result.protocol) << ',' << buf << ',' << m.cumulative_bits
        << '\n';
  }
}

void write_client_metrics_csv(const RunResult& result, std::ostream& out) {
  out << "round,client,accuracy\n";
  char buf[64];
  for (const RoundMetrics& m : result.rounds) {
    for (std::size_t c = 0; c < m.client_accuracy.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.6f", m.client_accuracy[c]);
      out << m.round << ',' << c << ',' << buf << '\n';
    }
  }
}

}  // namespace cefl
