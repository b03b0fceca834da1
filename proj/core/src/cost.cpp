#include "cefl/cost.hpp"

#include <numeric>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cefl/error.hpp"

namespace cefl {
namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw InputError("bit count overflows 64 bits");
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw InputError("bit count overflows 64 bits");
  return out;
}

std::uint64_t prefix_sum(std::span<const std::uint64_t> delta, std::size_t count) {
  std::uint64_t s = 0;
  for (std::size_t l = 0; l < count; ++l) s = checked_add(s, delta[l]);
  return s;
}

std::string endpoint(std::int64_t id) {
  if (id == kServer) return "server";
  if (id == kBroadcast) return "broadcast";
  return std::to_string(id);
}

constexpr CostPhase kPhases[] = {CostPhase::kInitUpload, CostPhase::kFlUpload,
                                 CostPhase::kFlBroadcast, CostPhase::kTransfer};

}  // namespace

std::string_view to_string(CostPhase p) {
  switch (p) {
    case CostPhase::kInitUpload:
      return "init_upload";
    case CostPhase::kFlUpload:
      return "fl_upload";
    case CostPhase::kFlBroadcast:
      return "fl_broadcast";
    case CostPhase::kTransfer:
      return "transfer";
  }
  return "unknown";
}

SizeModel::SizeModel(std::vector<std::uint64_t> delta) : delta_(std::move(delta)) {
  if (delta_.empty()) throw InputError("size model needs at least one layer");
  for (std::uint64_t d : delta_) {
    if (d == 0) throw InputError("layer sizes must be positive");
  }
}

SizeModel SizeModel::from_model(const ModelParams& m, unsigned bits_per_param) {
  if (bits_per_param == 0) throw InputError("bits_per_param must be positive");
  std::vector<std::uint64_t> delta;
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    delta.push_back(checked_mul(m.flat_layer_size(l), bits_per_param));
  }
  return SizeModel(std::move(delta));
}

std::uint64_t SizeModel::bits(LayerRange range) const {
  if (range.end > delta_.size() || range.begin > range.end) {
    throw InputError("layer range outside the size model");
  }
  std::uint64_t s = 0;
  for (std::size_t l = range.begin; l < range.end; ++l) s = checked_add(s, delta_[l]);
  return s;
}

void CostLedger::record(CostPhase phase, std::int64_t sender, std::int64_t receiver,
                        LayerRange layers) {
  const std::uint64_t bits = sizes_.bits(layers);
  total_ = checked_add(total_, bits);
  events_.push_back({phase, sender, receiver, layers, bits});
}

std::uint64_t CostLedger::subtotal(CostPhase phase) const {
  std::uint64_t s = 0;
  for (const CostEvent& e : events_) {
    if (e.phase == phase) s += e.bits;
  }
  return s;
}

std::size_t CostLedger::count(CostPhase phase) const {
  std::size_t c = 0;
  for (const CostEvent& e : events_) {
    if (e.phase == phase) ++c;
  }
  return c;
}

std::uint64_t closed_form_delta(std::uint64_t n_clients, std::uint64_t n_clusters,
                                std::uint64_t rounds, std::size_t base_layers,
                                std::span<const std::uint64_t> delta) {
  if (base_layers < 1 || base_layers > delta.size()) {
    throw InputError("closed_form_delta: need 1 <= B <= L, got B=" + std::to_string(base_layers) +
                     ", L=" + std::to_string(delta.size()));
  }
  const std::uint64_t all = prefix_sum(delta, delta.size());
  const std::uint64_t base = prefix_sum(delta, base_layers);
  const std::uint64_t cluster_and_transfer =
      checked_mul(checked_add(n_clients, n_clusters), all);
  const std::uint64_t rounds_part =
      checked_mul(checked_mul(rounds, checked_add(n_clusters, 1)), base);
  return checked_add(cluster_and_transfer, rounds_part);
}

std::uint64_t baseline_delta(std::uint64_t n_clients, std::uint64_t rounds,
                             std::size_t shared_layers, std::span<const std::uint64_t> delta) {
  if (shared_layers < 1 || shared_layers > delta.size()) {
    throw InputError("baseline_delta: need 1 <= B <= L");
  }
  return checked_mul(checked_mul(rounds, checked_add(n_clients, 1)),
                     prefix_sum(delta, shared_layers));
}

std::uint64_t ledger_total(const CostLedger& ledger) {
  std::uint64_t s = 0;
  for (const CostEvent& e : ledger.events()) s = checked_add(s, e.bits);
  return s;
}

double savings_ratio(std::uint64_t candidate_bits, std::uint64_t baseline_bits) {
  if (baseline_bits == 0) throw InputError("savings_ratio: baseline cost is zero");
  return 1.0 - static_cast<double>(candidate_bits) / static_cast<double>(baseline_bits);
}

void export_ledger_csv(const CostLedger& ledger, std::ostream& out) {
  out << "phase,sender,receiver,layers,bits\n";
  for (const CostEvent& e : ledger.events()) {
    out << to_string(e.phase) << ',' << endpoint(e.sender) << ',' << endpoint(e.receiver) << ','
        << e.layers.begin + 1 << '-' << e.layers.end << ',' << e.bits << '\n';
  }
}

void export_ledger_summary_json(const CostLedger& ledger,
                                std::optional<std::uint64_t> closed_form, std::ostream& out) {
  nlohmann::json phases = nlohmann::json::object();
  for (CostPhase p : kPhases) {
    phases[std::string(to_string(p))] = {{"events", ledger.count(p)}, {"bits", ledger.subtotal(p)}};
  }
  nlohmann::json doc = {{"phases", phases}, {"total_bits", ledger.total()}};
  if (closed_form) {
    doc["closed_form_bits"] = *closed_form;
    doc["match"] = *closed_form == ledger.total();
  }
  out << doc.dump(2) << '\n';
}

}  // namespace cefl
