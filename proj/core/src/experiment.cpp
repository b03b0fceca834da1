#include "cefl/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cefl/cost.hpp"

namespace cefl {
namespace {

using nlohmann::json;

// Collects issues while reading typed fields out of a JSON document.
class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void issue(std::string field, std::string message) {
    issues_.push_back({std::move(field), std::move(message)});
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    issue(path, "expected an object");
    return false;
  }

  void known_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) issue(join(path, key), "unknown key");
    }
  }

  bool size(const json& j, const std::string& key, const std::string& path, std::size_t& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                   !v.is_number_unsigned())) {
      issue(join(path, key), "expected a nonnegative integer");
      return false;
    }
    out = v.get<std::size_t>();
    return true;
  }

  bool u64(const json& v, const std::string& field, std::uint64_t& out) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      issue(field, "expected a nonnegative integer");
      return false;
    }
    out = v.get<std::uint64_t>();
    return true;
  }

  bool number(const json& j, const std::string& key, const std::string& path, double& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_number()) {
      issue(join(path, key), "expected a number");
      return false;
    }
    out = v.get<double>();
    return true;
  }

  bool string(const json& j, const std::string& key, const std::string& path, std::string& out) {
    if (!j.contains(key)) return false;
    const json& v = j.at(key);
    if (!v.is_string()) {
      issue(join(path, key), "expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<ConfigIssue>& issues_;
};

std::size_t default_rounds(Protocol p) {
  return p == Protocol::kCefl ? 100 : 350;
}

void read_dataset(Reader& r, const json& j, const std::filesystem::path& base_dir,
                  DatasetConfig& out) {
  const std::string path = "dataset";
  if (!r.object(j, path)) return;
  r.known_keys(j, path, {"kind", "clients", "profiles", "sample_scale", "synth", "path"});
  std::string kind = "synthetic";
  r.string(j, "kind", path, kind);
  if (kind == "synthetic") {
    out.kind = DatasetConfig::Kind::kSynthetic;
  } else if (kind == "csv") {
    out.kind = DatasetConfig::Kind::kCsv;
  } else {
    r.issue("dataset.kind", "expected \"synthetic\" or \"csv\", got \"" + kind + "\"");
  }
  r.size(j, "clients", path, out.clients);
  r.number(j, "sample_scale", path, out.sample_scale);
  std::string csv;
  if (r.string(j, "path", path, csv)) {
    out.csv_path = csv;
    if (out.csv_path.is_relative() && !base_dir.empty()) out.csv_path = base_dir / out.csv_path;
  }
  if (j.contains("profiles")) {
    const json& p = j.at("profiles");
    if (p.is_string()) {
      if (p.get<std::string>() != "flagship") {
        r.issue("dataset.profiles", "expected \"flagship\" or a list of profiles");
      }
    } else if (p.is_array()) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const std::string field = "dataset.profiles[" + std::to_string(i) + "]";
        if (!r.object(p[i], field)) continue;
        r.known_keys(p[i], field, {"n_samples", "class_weights"});
        HeterogeneityProfile prof;
        r.size(p[i], "n_samples", field, prof.n_samples);
        const json* w = p[i].contains("class_weights") ? &p[i].at("class_weights") : nullptr;
        if (!w || !w->is_array() || w->size() != kNumClasses) {
          r.issue(field + ".class_weights", "expected a list of 8 numbers");
        } else {
          for (std::size_t k = 0; k < kNumClasses; ++k) {
            if (!(*w)[k].is_number()) {
              r.issue(field + ".class_weights", "expected a list of 8 numbers");
              break;
            }
            prof.class_weights[k] = (*w)[k].get<double>();
          }
        }
        out.profiles.push_back(prof);
      }
    } else {
      r.issue("dataset.profiles", "expected \"flagship\" or a list of profiles");
    }
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    const std::string sp = "dataset.synth";
    if (r.object(s, sp)) {
      r.known_keys(s, sp,
                   {"noise", "subject_jitter", "recording_jitter", "fall_duration",
                    "fall_like_duration", "daily_duration", "event_time_min", "event_time_max"});
      r.number(s, "noise", sp, out.synth.noise);
      r.number(s, "subject_jitter", sp, out.synth.subject_jitter);
      r.number(s, "recording_jitter", sp, out.synth.recording_jitter);
      r.number(s, "fall_duration", sp, out.synth.fall_duration);
      r.number(s, "fall_like_duration", sp, out.synth.fall_like_duration);
      r.number(s, "daily_duration", sp, out.synth.daily_duration);
      r.number(s, "event_time_min", sp, out.synth.event_time_min);
      r.number(s, "event_time_max", sp, out.synth.event_time_max);
    }
  }
}

void read_model(Reader& r, const json& j, std::vector<LayerSpec>& out) {
  if (!j.is_array() || j.empty()) {
    r.issue("model", "expected a nonempty list of layers");
    return;
  }
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string field = "model[" + std::to_string(i) + "]";
    if (!r.object(j[i], field)) continue;
    r.known_keys(j[i], field, {"input_dim", "output_dim", "activation"});
    LayerSpec spec;
    if (!r.size(j[i], "input_dim", field, spec.input_dim)) {
      if (!j[i].contains("input_dim")) r.issue(field + ".input_dim", "required");
    }
    if (!r.size(j[i], "output_dim", field, spec.output_dim)) {
      if (!j[i].contains("output_dim")) r.issue(field + ".output_dim", "required");
    }
    std::string act = i + 1 == j.size() ? "softmax" : "relu";
    r.string(j[i], "activation", field, act);
    try {
      spec.activation = activation_from_string(act);
    } catch (const ConfigError& e) {
      r.issue(field + ".activation", e.what());
    }
    out.push_back(spec);
  }
}

void read_train(Reader& r, const json& j, TrainConfig& out) {
  if (!r.object(j, "train")) return;
  r.known_keys(j, "train",
               {"learning_rate", "batch_size", "adam_beta1", "adam_beta2", "adam_epsilon"});
  r.number(j, "learning_rate", "train", out.learning_rate);
  r.size(j, "batch_size", "train", out.batch_size);
  r.number(j, "adam_beta1", "train", out.adam_beta1);
  r.number(j, "adam_beta2", "train", out.adam_beta2);
  r.number(j, "adam_epsilon", "train", out.adam_epsilon);
}

void read_protocols(Reader& r, const json& j, unsigned bits_per_param,
                    std::vector<NamedProtocol>& out) {
  if (!j.is_array()) {
    r.issue("protocols", "expected a list");
    return;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string field = "protocols[" + std::to_string(i) + "]";
    if (!r.object(j[i], field)) continue;
    r.known_keys(j[i], field,
                 {"protocol", "name", "clusters", "rounds", "epsilon", "epsilon_init", "eta",
                  "base_layers", "leader_weights", "individual_episodes", "patience",
                  "min_delta"});
    NamedProtocol np;
    std::string kind;
    if (!r.string(j[i], "protocol", field, kind)) {
      if (!j[i].contains("protocol")) r.issue(field + ".protocol", "required");
      continue;
    }
    try {
      np.config.protocol = protocol_from_string(kind);
    } catch (const ConfigError& e) {
      r.issue(field + ".protocol", e.what());
      continue;
    }
    ProtocolConfig& c = np.config;
    c.rounds = default_rounds(c.protocol);
    c.bits_per_param = bits_per_param;
    np.name = kind;
    r.string(j[i], "name", field, np.name);
    r.size(j[i], "clusters", field, c.clusters);
    r.size(j[i], "rounds", field, c.rounds);
    r.size(j[i], "epsilon", field, c.epsilon);
    r.size(j[i], "epsilon_init", field, c.epsilon_init);
    r.size(j[i], "eta", field, c.eta);
    std::size_t b = 0;
    if (r.size(j[i], "base_layers", field, b)) c.base_layers = b;
    r.size(j[i], "individual_episodes", field, c.individual_episodes);
    r.size(j[i], "patience", field, c.patience);
    r.number(j[i], "min_delta", field, c.min_delta);
    if (j[i].contains("leader_weights")) {
      const json& w = j[i].at("leader_weights");
      bool ok = w.is_array();
      for (std::size_t k = 0; ok && k < w.size(); ++k) ok = w[k].is_number();
      if (!ok) {
        r.issue(field + ".leader_weights", "expected a list of numbers");
      } else {
        for (const json& v : w) c.leader_weights.push_back(v.get<double>());
      }
    }
    out.push_back(std::move(np));
  }
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

std::optional<std::uint64_t> expected_cost(const ProtocolConfig& cfg, const RunResult& r,
                                           std::size_t n) {
  const auto& delta = r.ledger.sizes().delta();
  const std::size_t num_layers = delta.size();
  switch (cfg.protocol) {
    case Protocol::kIndividual:
      return 0;
    case Protocol::kRegularFl:
      return baseline_delta(n, cfg.rounds, num_layers, delta);
    case Protocol::kFedPer:
      return baseline_delta(n, cfg.rounds, cfg.resolve_base_layers(num_layers), delta);
    case Protocol::kCefl:
      return closed_form_delta(n, r.clustering ? r.clustering->num_clusters() : cfg.clusters,
                               cfg.rounds, cfg.resolve_base_layers(num_layers), delta);
  }
  return std::nullopt;
}

RunSummary write_run(const std::filesystem::path& dir, const std::string& name,
                     const ProtocolConfig& cfg, std::uint64_t seed, const RunResult& r,
                     std::size_t n_clients) {
  std::filesystem::create_directories(dir);
  write_file(dir / "metrics.csv", render([&](std::ostream& o) { write_metrics_csv(r, o); }));
  write_file(dir / "clients.csv", render([&](std::ostream& o) { write_client_metrics_csv(r, o); }));
  write_file(dir / "ledger.csv", render([&](std::ostream& o) { export_ledger_csv(r.ledger, o); }));
  const std::optional<std::uint64_t> expected = expected_cost(cfg, r, n_clients);
  write_file(dir / "ledger_summary.json",
             render([&](std::ostream& o) { export_ledger_summary_json(r.ledger, expected, o); }));
  if (r.clustering) {
    write_file(dir / "clustering.json",
               render([&](std::ostream& o) { export_clustering_json(*r.clustering, o); }));
  }
  if (r.graph) {
    write_file(dir / "graph.txt", render([&](std::ostream& o) { export_edge_list(*r.graph, o); }));
  }

  RunSummary s;
  s.name = name;
  s.protocol = cfg.protocol;
  s.seed = seed;
  s.rounds = cfg.protocol == Protocol::kIndividual ? 0 : cfg.rounds;
  s.episodes_per_round = cfg.protocol == Protocol::kIndividual ? 0 : cfg.epsilon;
  s.local_episodes = cfg.protocol == Protocol::kIndividual ? cfg.individual_episodes
                     : cfg.protocol == Protocol::kCefl    ? cfg.eta
                                                          : 0;
  s.final_mean_accuracy = r.final_metrics().mean_accuracy;
  s.final_std_accuracy = r.final_metrics().std_accuracy;
  s.cost_bits = r.ledger.total();
  s.directory = dir;

  json doc = {{"name", name},
              {"protocol", std::string(to_string(cfg.protocol))},
              {"seed", seed},
              {"clients", n_clients},
              {"rounds", s.rounds},
              {"episodes_per_round", s.episodes_per_round},
              {"local_episodes", s.local_episodes},
              {"final_mean_accuracy", s.final_mean_accuracy},
              {"final_std_accuracy", s.final_std_accuracy},
              {"final_client_accuracy", json::array()},
              {"cost_bits", s.cost_bits},
              {"scope_checks", r.scope_checks},
              {"scope_violations", r.scope_violations},
              {"warnings", r.warnings}};
  for (double a : r.final_metrics().client_accuracy) {
    doc["final_client_accuracy"].push_back(std::isnan(a) ? json(nullptr) : json(a));
  }
  if (expected) {
    doc["expected_cost_bits"] = *expected;
    doc["cost_matches"] = *expected == s.cost_bits;
  }
  if (r.clustering) {
    doc["clusters"] = r.clustering->clusters();
    doc["leaders"] = r.clustering->leaders;
    doc["clustering_fallback"] = r.clustering->fallback;
    doc["transfer_episodes"] = r.transfer_episodes;
  }
  write_file(dir / "summary.json", doc.dump(2) + "\n");
  return s;
}

std::string run_dir_name(const std::string& name, std::uint64_t seed) {
  return name + "_seed" + std::to_string(seed);
}

}  // namespace

std::vector<LayerSpec> default_layers() {
  return {{kFeatureLength, 128, Activation::kRelu},
          {128, 64, Activation::kRelu},
          {64, kNumClasses, Activation::kSoftmax}};
}

ParsedConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  ParsedConfig parsed;
  parsed.config.layers = default_layers();
  Reader r(parsed.issues);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    r.issue("", std::string("invalid JSON: ") + e.what());
    return parsed;
  }
  if (!r.object(doc, "(root)")) return parsed;
  r.known_keys(doc, "",
               {"dataset", "model", "train", "bits_per_param", "protocols", "seeds", "k_sweep",
                "output_dir"});
  RunConfig& c = parsed.config;
  if (doc.contains("dataset")) read_dataset(r, doc.at("dataset"), base_dir, c.dataset);
  if (doc.contains("model")) read_model(r, doc.at("model"), c.layers);
  if (doc.contains("train")) read_train(r, doc.at("train"), c.train);
  std::size_t bits = 32;
  r.size(doc, "bits_per_param", "", bits);
  if (doc.contains("protocols")) {
    read_protocols(r, doc.at("protocols"), static_cast<unsigned>(bits), c.protocols);
  } else {
    r.issue("protocols", "required");
  }
  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    if (!s.is_array()) {
      r.issue("seeds", "expected a list of nonnegative integers");
    } else {
      c.seeds.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        std::uint64_t v = 0;
        if (r.u64(s[i], "seeds[" + std::to_string(i) + "]", v)) c.seeds.push_back(v);
      }
    }
  }
  if (doc.contains("k_sweep")) {
    const json& k = doc.at("k_sweep");
    if (!k.is_array()) {
      r.issue("k_sweep", "expected a list of cluster counts");
    } else {
      for (std::size_t i = 0; i < k.size(); ++i) {
        std::uint64_t v = 0;
        if (r.u64(k[i], "k_sweep[" + std::to_string(i) + "]", v)) c.k_sweep.push_back(v);
      }
    }
  }
  std::string out_dir;
  if (r.string(doc, "output_dir", "", out_dir)) c.output_dir = out_dir;
  return parsed;
}

ParsedConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_run_config(s.str(), path.parent_path());
}

std::size_t dataset_clients(const DatasetConfig& dataset) {
  if (dataset.kind == DatasetConfig::Kind::kSynthetic) return dataset.clients;
  const std::vector<RawRecording> recs = ingest_csv(dataset.csv_path);
  std::set<int> subjects;
  for (const RawRecording& r : recs) subjects.insert(r.subject_id);
  return subjects.size();
}

std::vector<ClientShard> build_dataset(const DatasetConfig& dataset, std::uint64_t seed,
                                       WarningLog* warnings) {
  if (dataset.kind == DatasetConfig::Kind::kCsv) {
    const std::vector<RawRecording> recs = ingest_csv(dataset.csv_path);
    return shards_from_recordings(recs, seed, warnings);
  }
  std::vector<HeterogeneityProfile> profiles =
      dataset.profiles.empty() ? flagship_profiles(dataset.clients, seed) : dataset.profiles;
  if (dataset.sample_scale != 1.0) {
    for (HeterogeneityProfile& p : profiles) {
      const double scaled = std::round(static_cast<double>(p.n_samples) * dataset.sample_scale);
      p.n_samples = std::max<std::size_t>(1, static_cast<std::size_t>(scaled));
    }
  }
  return synth_dataset(dataset.clients, profiles, seed, dataset.synth, warnings);
}

std::vector<ConfigIssue> validate_run_config(const RunConfig& config) {
  std::vector<ConfigIssue> issues;
  auto add = [&](std::string field, std::string msg) {
    issues.push_back({std::move(field), std::move(msg)});
  };

  try {
    validate_specs(config.layers);
    if (config.layers.front().input_dim != kFeatureLength) {
      add("model[0].input_dim", "must be " + std::to_string(kFeatureLength) +
                                    " to match the 20x20x3 feature images");
    }
    if (config.layers.back().output_dim != kNumClasses) {
      add("model[" + std::to_string(config.layers.size() - 1) + "].output_dim",
          "must be " + std::to_string(kNumClasses) + " (activity classes)");
    }
  } catch (const ConfigError& e) {
    add("model", e.what());
  }
  try {
    config.train.validate();
  } catch (const ConfigError& e) {
    add("train", e.what());
  }

  const DatasetConfig& ds = config.dataset;
  std::size_t n = 0;
  if (ds.kind == DatasetConfig::Kind::kSynthetic) {
    n = ds.clients;
    if (n == 0) add("dataset.clients", "must be >= 1");
    if (!ds.profiles.empty() && ds.profiles.size() != ds.clients) {
      add("dataset.profiles", std::to_string(ds.profiles.size()) + " profiles given for " +
                                  std::to_string(ds.clients) + " clients");
    }
    for (std::size_t i = 0; i < ds.profiles.size(); ++i) {
      try {
        ds.profiles[i].validate();
      } catch (const ConfigError& e) {
        add("dataset.profiles[" + std::to_string(i) + "]", e.what());
      }
    }
    if (!(ds.sample_scale > 0.0)) add("dataset.sample_scale", "must be positive");
    if (!(ds.synth.noise >= 0.0)) add("dataset.synth.noise", "must be >= 0");
    if (!(ds.synth.event_time_min >= 0.0 && ds.synth.event_time_min <= ds.synth.event_time_max)) {
      add("dataset.synth.event_time_min", "must satisfy 0 <= event_time_min <= event_time_max");
    }
  } else {
    if (ds.csv_path.empty()) {
      add("dataset.path", "required for csv datasets");
    } else {
      try {
        n = dataset_clients(ds);
        if (n == 0) add("dataset.path", "no subjects in " + ds.csv_path.string());
      } catch (const std::exception& e) {
        add("dataset.path", e.what());
      }
    }
  }

  if (config.protocols.empty()) add("protocols", "at least one protocol required");
  if (config.seeds.empty()) add("seeds", "at least one seed required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < config.protocols.size(); ++i) {
    const NamedProtocol& p = config.protocols[i];
    const std::string prefix = "protocols[" + std::to_string(i) + "]";
    if (!names.insert(p.name).second) add(prefix + ".name", "duplicate name \"" + p.name + "\"");
    if (p.name.empty() || p.name.find_first_of("/\\") != std::string::npos) {
      add(prefix + ".name", "must be nonempty and contain no path separators");
    }
    if (n == 0) continue;
    for (const std::string& d : p.config.diagnostics(n, config.layers.size())) {
      const auto colon = d.find(": ");
      if (colon == std::string::npos) {
        add(prefix, d);
      } else {
        add(prefix + "." + d.substr(0, colon), d.substr(colon + 2));
      }
    }
  }
  for (std::size_t i = 0; i < config.k_sweep.size(); ++i) {
    const std::size_t k = config.k_sweep[i];
    if (n > 0 && (k < 1 || k > n)) {
      add("k_sweep[" + std::to_string(i) + "]",
          "K=" + std::to_string(k) + " violates 1 <= K <= N (N=" + std::to_string(n) + ")");
    }
  }
  return issues;
}

ExperimentReport run_experiment(const RunConfig& config, std::ostream* log) {
  const std::vector<ConfigIssue> issues = validate_run_config(config);
  if (!issues.empty()) {
    std::string msg = "invalid configuration";
    for (const ConfigIssue& i : issues) msg += "\n  " + i.text();
    throw ConfigError(msg);
  }
  ExperimentReport report;
  std::filesystem::create_directories(config.output_dir);

  // K sweep uses the first cefl entry as its template.
  NamedProtocol sweep_base{"cefl", {}};
  for (const NamedProtocol& p : config.protocols) {
    if (p.config.protocol == Protocol::kCefl) {
      sweep_base = p;
      break;
    }
  }
  // (K, round) -> sums over seeds of mean and std accuracy.
  std::map<std::pair<std::size_t, std::size_t>, std::array<double, 3>> sweep;

  for (std::uint64_t seed : config.seeds) {
    WarningLog data_warnings;
    const std::vector<ClientShard> shards = build_dataset(config.dataset, seed, &data_warnings);
    if (log) {
      for (const std::string& w : data_warnings) *log << "warning: " << w << '\n';
    }
    for (const NamedProtocol& p : config.protocols) {
      if (log) *log << "running " << p.name << " seed " << seed << '\n';
      const RunResult r = run_protocol(p.config, config.train, config.layers, shards, seed);
      if (log) {
        for (const std::string& w : r.warnings) *log << "warning: " << w << '\n';
      }
      report.runs.push_back(write_run(config.output_dir / run_dir_name(p.name, seed), p.name,
                                      p.config, seed, r, shards.size()));
    }
    for (std::size_t k : config.k_sweep) {
      ProtocolConfig cfg = sweep_base.config;
      cfg.clusters = k;
      cfg.leader_weights.clear();
      const std::string name = sweep_base.name + "_k" + std::to_string(k);
      if (log) *log << "running " << name << " seed " << seed << '\n';
      const RunResult r = run_cefl(cfg, config.train, config.layers, shards, seed);
      write_run(config.output_dir / run_dir_name(name, seed), name, cfg, seed, r, shards.size());
      for (const RoundMetrics& m : r.rounds) {
        auto& acc = sweep[{k, m.round}];
        acc[0] += m.mean_accuracy;
        acc[1] += m.std_accuracy;
        acc[2] += 1.0;
      }
    }
  }

  for (const NamedProtocol& p : config.protocols) {
    ComparisonRow row;
    row.name = p.name;
    row.protocol = p.config.protocol;
    std::size_t count = 0;
    bool first = true;
    for (const RunSummary& s : report.runs) {
      if (s.name != p.name) continue;
      if (first) {
        row.rounds = s.rounds;
        row.episodes_per_round = s.episodes_per_round;
        row.local_episodes = s.local_episodes;
        row.cost_bits = s.cost_bits;
        first = false;
      } else if (s.cost_bits != row.cost_bits) {
        throw InternalError("cost of " + p.name + " differs across seeds");
      }
      row.mean_accuracy += s.final_mean_accuracy;
      row.std_accuracy += s.final_std_accuracy;
      ++count;
    }
    row.mean_accuracy /= static_cast<double>(count);
    row.std_accuracy /= static_cast<double>(count);
    report.comparison.push_back(row);
  }
  const ComparisonRow* regular = nullptr;
  for (const ComparisonRow& row : report.comparison) {
    if (row.protocol == Protocol::kRegularFl) {
      regular = &row;
      break;
    }
  }
  if (regular && regular->cost_bits > 0) {
    for (ComparisonRow& row : report.comparison) {
      row.savings = savings_ratio(row.cost_bits, regular->cost_bits);
    }
  }
  write_file(config.output_dir / "comparison.csv",
             render([&](std::ostream& o) { write_comparison_csv(report.comparison, o); }));
  write_file(config.output_dir / "comparison.txt",
             render([&](std::ostream& o) { write_comparison_text(report.comparison, o); }));
  if (!config.k_sweep.empty()) {
    std::ostringstream o;
    o << "k,round,mean_acc,std_acc\n";
    for (const auto& [key, acc] : sweep) {
      o << key.first << ',' << key.second << ',' << fixed(acc[0] / acc[2]) << ','
        << fixed(acc[1] / acc[2]) << '\n';
    }
    write_file(config.output_dir / "ksweep.csv", o.str());
  }
  return report;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "name,protocol,rounds,episodes_per_round,local_episodes,mean_acc,std_acc,cost_bits,"
         "savings_vs_regular_fl\n";
  for (const ComparisonRow& r : rows) {
    out << r.name << ',' << to_string(r.protocol) << ',' << r.rounds << ','
        << r.episodes_per_round << ',' << r.local_episodes << ',' << fixed(r.mean_accuracy) << ','
        << fixed(r.std_accuracy) << ',' << r.cost_bits << ','
        << (r.savings ? fixed(*r.savings) : std::string()) << '\n';
  }
}

void write_comparison_text(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  const std::vector<std::string> header = {"name",     "rounds", "eps/round", "local eps",
                                           "accuracy %", "cost (bits)", "savings %"};
  std::vector<std::vector<std::string>> table = {header};
  for (const ComparisonRow& r : rows) {
    table.push_back({r.name, r.rounds ? std::to_string(r.rounds) : "-",
                     r.episodes_per_round ? std::to_string(r.episodes_per_round) : "-",
                     r.local_episodes ? std::to_string(r.local_episodes) : "-",
                     fixed(100.0 * r.mean_accuracy, 2) + " +- " + fixed(100.0 * r.std_accuracy, 2),
                     std::to_string(r.cost_bits),
                     r.savings ? fixed(100.0 * *r.savings, 2) : "-"});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  for (const auto& line : table) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::size_t pad = width[c] - line[c].size();
      // Left-align the name column, right-align numbers.
      text += c == 0 ? line[c] + std::string(pad, ' ') : std::string(pad, ' ') + line[c];
      if (c + 1 < line.size()) text += "  ";
    }
    out << text << '\n';
  }
}

}  // namespace cefl
