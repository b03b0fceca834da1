#pragma once

// Weight-space distances between client models and the similarity graph
// built from them.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "cefl/model.hpp"

namespace cefl {

/// Dense symmetric weight matrix with a zero diagonal. Weights are
/// nonnegative. This is the graph the clustering algorithms operate on.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  /// Throws InputError unless weights is n*n, symmetric, nonnegative and
  /// finite with a zero diagonal.
  WeightedGraph(std::size_t n, std::vector<double> weights);

  std::size_t size() const { return n_; }
  double weight(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  const std::vector<double>& matrix() const { return w_; }

  /// Sum of row i.
  double degree(std::size_t i) const;
  /// Sum over all ordered pairs, i.e. twice the total edge weight.
  double total_degree() const;
  /// True when every off-diagonal entry is equal.
  bool constant_weights() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> w_;
};

/// Sum over layers of the Euclidean norm of the per-layer difference of
/// flat_layer vectors (weights and biases). Throws InputError when the two
/// models differ in structure.
double pair_distance(const ModelParams& a, const ModelParams& b);

class SimilarityGraph {
 public:
  /// From a symmetric distance matrix with zero diagonal (n >= 2).
  /// S_ij = -d_ij + d_min + d_max off the diagonal, 0 on it.
  static SimilarityGraph from_distances(std::size_t n, std::vector<double> distances);

  std::size_t size() const { return n_; }
  double distance(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double similarity(std::size_t i, std::size_t j) const { return s_.weight(i, j); }
  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }
  /// All off-diagonal distances are equal, so S carries no information.
  bool degenerate() const { return d_min_ == d_max_; }

  const WeightedGraph& graph() const { return s_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
  WeightedGraph s_;
  double d_min_ = 0.0;
  double d_max_ = 0.0;
};

/// Distances between every pair of models, then the similarity transform.
/// Throws InputError for fewer than two models or mismatched structures.
SimilarityGraph build_graph(std::span<const ModelParams> models);

/// One line "i j d_ij S_ij" per pair i < j.
void export_edge_list(const SimilarityGraph& g, std::ostream& out);

}  // namespace cefl
