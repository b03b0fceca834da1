#include "cefl/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "cefl/error.hpp"

namespace cefl {

WeightedGraph::WeightedGraph(std::size_t n, std::vector<double> weights)
    : n_(n), w_(std::move(weights)) {
  if (w_.size() != n_ * n_) throw InputError("weight matrix is not n x n");
  for (std::size_t i = 0; i < n_; ++i) {
    if (w_[i * n_ + i] != 0.0) throw InputError("weight matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = w_[i * n_ + j];
      if (!std::isfinite(a) || a < 0.0) {
        throw InputError("edge weights must be finite and nonnegative");
      }
      if (a != w_[j * n_ + i]) throw InputError("weight matrix must be symmetric");
    }
  }
}

double WeightedGraph::degree(std::size_t i) const {
  double k = 0.0;
  for (std::size_t j = 0; j < n_; ++j) k += w_[i * n_ + j];
  return k;
}

double WeightedGraph::total_degree() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += degree(i);
  return t;
}

bool WeightedGraph::constant_weights() const {
  if (n_ < 2) return true;
  const double first = w_[1];
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (w_[i * n_ + j] != first) return false;
    }
  }
  return true;
}

double pair_distance(const ModelParams& a, const ModelParams& b) {
  if (!a.same_structure(b)) throw InputError("pair_distance: model structures differ");
  double total = 0.0;
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    const LayerParams& pa = a.layer(l);
    const LayerParams& pb = b.layer(l);
    double sq = 0.0;
    for (std::size_t i = 0; i < pa.weights.size(); ++i) {
      const double d = pa.weights[i] - pb.weights[i];
      sq += d * d;
    }
    for (std::size_t i = 0; i < pa.bias.size(); ++i) {
      const double d = pa.bias[i] - pb.bias[i];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total;
}

SimilarityGraph SimilarityGraph::from_distances(std::size_t n, std::vector<double> distances) {
  if (n < 2) throw InputError("similarity graph needs at least two clients");
  if (distances.size() != n * n) throw InputError("distance matrix is not n x n");
  SimilarityGraph g;
  g.n_ = n;
  g.d_ = std::move(distances);
  g.d_min_ = g.d_[1];
  g.d_max_ = g.d_[1];
  for (std::size_t i = 0; i < n; ++i) {
    if (g.d_[i * n + i] != 0.0) throw InputError("distance diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = g.d_[i * n + j];
      if (!std::isfinite(d) || d < 0.0) throw InputError("distances must be finite and >= 0");
      if (d != g.d_[j * n + i]) throw InputError("distance matrix must be symmetric");
      g.d_min_ = std::min(g.d_min_, d);
      g.d_max_ = std::max(g.d_max_, d);
    }
  }
  std::vector<double> s(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // Clamped so rounding cannot push S outside [d_min, d_max].
      if (i != j) {
        s[i * n + j] = std::clamp(-g.d_[i * n + j] + g.d_min_ + g.d_max_, g.d_min_, g.d_max_);
      }
    }
  }
  g.s_ = WeightedGraph(n, std::move(s));
  return g;
}

SimilarityGraph build_graph(std::span<const ModelParams> models) {
  const std::size_t n = models.size();
  if (n < 2) throw InputError("build_graph: need at least two models");
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = pair_distance(models[i], models[j]);
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  return SimilarityGraph::from_distances(n, std::move(d));
}

void export_edge_list(const SimilarityGraph& g, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      out << i << ' ' << j << ' ' << g.distance(i, j) << ' ' << g.similarity(i, j) << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace cefl
