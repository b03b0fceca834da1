#pragma once

// Communication metering. Every simulated transmission is appended to a
// ledger in bits; totals are exact integers and reconcile with the closed
// form for the clustered protocol.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cefl/model.hpp"

namespace cefl {

enum class CostPhase { kInitUpload, kFlUpload, kFlBroadcast, kTransfer };

std::string_view to_string(CostPhase p);

/// Endpoint ids: clients are >= 0.
inline constexpr std::int64_t kServer = -1;
inline constexpr std::int64_t kBroadcast = -2;

/// Per-layer transmission sizes delta_l in bits.
class SizeModel {
 public:
  /// Throws InputError if empty or any entry is zero.
  explicit SizeModel(std::vector<std::uint64_t> delta);

  /// delta_l = flat_layer(l).size() * bits_per_param.
  static SizeModel from_model(const ModelParams& m, unsigned bits_per_param = 32);

  std::size_t num_layers() const { return delta_.size(); }
  const std::vector<std::uint64_t>& delta() const { return delta_; }
  /// Sum of delta over the range. Throws InputError if it exceeds the model.
  std::uint64_t bits(LayerRange range) const;
  std::uint64_t total() const { return bits({0, delta_.size()}); }

 private:
  std::vector<std::uint64_t> delta_;
};

struct CostEvent {
  CostPhase phase = CostPhase::kInitUpload;
  std::int64_t sender = kServer;
  std::int64_t receiver = kServer;
  LayerRange layers;
  std::uint64_t bits = 0;
};

class CostLedger {
 public:
  explicit CostLedger(SizeModel sizes) : sizes_(std::move(sizes)) {}

  /// Appends one transmission of the given layers; bits come from the size
  /// model.
  void record(CostPhase phase, std::int64_t sender, std::int64_t receiver, LayerRange layers);

  const std::vector<CostEvent>& events() const { return events_; }
  const SizeModel& sizes() const { return sizes_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t subtotal(CostPhase phase) const;
  std::size_t count(CostPhase phase) const;

 private:
  SizeModel sizes_;
  std::vector<CostEvent> events_;
  std::uint64_t total_ = 0;
};

/// (N + K) * sum_{l<=L} delta_l + T * (K + 1) * sum_{l<=B} delta_l.
/// Throws InputError unless 1 <= B <= L; overflow raises InputError too.
std::uint64_t closed_form_delta(std::uint64_t n_clients, std::uint64_t n_clusters,
                                std::uint64_t rounds, std::size_t base_layers,
                                std::span<const std::uint64_t> delta);

/// Reference accounting for the baselines: each round every client uploads
/// the shared layers and the server broadcasts them once,
/// T * (N + 1) * sum_{l<=B} delta_l. Regular FL uses B = L.
std::uint64_t baseline_delta(std::uint64_t n_clients, std::uint64_t rounds,
                             std::size_t shared_layers, std::span<const std::uint64_t> delta);

std::uint64_t ledger_total(const CostLedger& ledger);

/// 1 - candidate / baseline. Throws InputError when baseline is zero.
double savings_ratio(std::uint64_t candidate_bits, std::uint64_t baseline_bits);

/// Columns: phase,sender,receiver,layers,bits. Layers are one-based and
/// inclusive ("1-3").
void export_ledger_csv(const CostLedger& ledger, std::ostream& out);

/// Per-phase subtotals and counts, the total, and, when given, the closed
/// form with a match flag.
void export_ledger_summary_json(const CostLedger& ledger,
                                std::optional<std::uint64_t> closed_form, std::ostream& out);

}  // namespace cefl
