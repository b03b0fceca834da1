#pragma once

// Central finite-difference check of loss_and_grads.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cefl/model.hpp"

namespace cefl::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t entries = 0;
};

/// rel = |analytic - numeric| / max(|analytic| + |numeric|, floor). The floor
/// keeps entries whose true gradient is ~0 from dividing noise by noise.
inline GradCheck check_gradients(const ModelParams& m, const Batch& batch, double h = 1e-5,
                                 double floor = 1e-6) {
  const LossAndGrads analytic = loss_and_grads(m, batch);
  GradCheck out;
  ModelParams probe = m;
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const std::vector<double> base = m.flat_layer(l);
    const std::vector<double> grad = analytic.grads.flat_layer(l);
    std::vector<double> flat = base;
    for (std::size_t e = 0; e < flat.size(); ++e) {
      flat[e] = base[e] + h;
      probe.set_flat_layer(l, flat);
      const double up = loss_and_grads(probe, batch).loss;
      flat[e] = base[e] - h;
      probe.set_flat_layer(l, flat);
      const double down = loss_and_grads(probe, batch).loss;
      flat[e] = base[e];
      probe.set_flat_layer(l, flat);
      const double numeric = (up - down) / (2.0 * h);
      const double rel = std::abs(grad[e] - numeric) /
                         std::max(std::abs(grad[e]) + std::abs(numeric), floor);
      out.max_rel_error = std::max(out.max_rel_error, rel);
      ++out.entries;
    }
  }
  return out;
}

}  // namespace cefl::testing
