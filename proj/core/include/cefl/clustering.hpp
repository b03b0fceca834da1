#pragma once

// Louvain community detection on the similarity graph, reduction to exactly
// K clusters, and leader selection.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "cefl/error.hpp"
#include "cefl/similarity.hpp"

namespace cefl {

struct Clustering {
  /// assignment[client] = cluster id in [0, K). Cluster ids are canonical:
  /// clusters are numbered in order of their smallest member.
  std::vector<std::size_t> assignment;
  /// leaders[k] is the leader of cluster k; empty until select_leaders runs.
  std::vector<std::size_t> leaders;
  /// Set when the graph carried no similarity information and clients were
  /// split into index-contiguous blocks instead.
  bool fallback = false;

  std::size_t num_clusters() const;
  /// Members of each cluster in ascending client order.
  std::vector<std::vector<std::size_t>> clusters() const;
  /// Throws InternalError unless ids are canonical and every cluster is
  /// nonempty; when leaders are set, each must belong to its own cluster.
  void validate() const;

  friend bool operator==(const Clustering&, const Clustering&) = default;
};

/// Renumbers cluster ids in order of first appearance.
Clustering canonical_clustering(std::span<const std::size_t> assignment);

/// Weighted modularity
///   Q = 1/(2m) * sum_ij [A_ij - k_i k_j / (2m)] * [c_i == c_j].
/// Throws InputError when the graph has no edge weight.
double modularity(const WeightedGraph& g, std::span<const std::size_t> assignment);

struct LouvainOptions {
  /// Record the modularity after every node move (costly, for tests).
  bool trace_moves = false;
};

struct LouvainResult {
  Clustering clustering;
  double modularity = 0.0;
  /// Modularity at the end of each level.
  std::vector<double> level_modularity;
  /// Modularity after each performed move, when tracing.
  std::vector<double> move_trace;
  std::size_t moves = 0;
  /// Constant-weight graph: no moves are attempted and every node stays in
  /// its own community.
  bool degenerate = false;
};

/// Two-phase Louvain: greedy local moves in a seeded node order until no
/// move gains, then community aggregation, repeated until a level makes no
/// move. Ties between candidate communities go to the lowest id.
LouvainResult louvain(const WeightedGraph& g, std::uint64_t seed,
                      const LouvainOptions& options = {});

/// Brings a partition to exactly k clusters. While there are too many, the
/// pair whose merge loses the least modularity is merged; while there are
/// too few, the member with the lowest intra-cluster similarity sum of the
/// largest cluster is detached into its own cluster. A final pass moves
/// single nodes between the k clusters while that strictly increases Q and
/// leaves the source cluster nonempty. When there are at most 250000
/// k-partitions of the nodes, all of them are scored and the best replaces
/// the greedy result if it is strictly better. Throws InputError if k is 0
/// or exceeds the node count.
Clustering coarsen_to_k(const WeightedGraph& g, const Clustering& clustering, std::size_t k);

/// leader of cluster k = argmax over members i of sum_{j in C_k, j != i} S_ij,
/// ties to the lowest client id.
Clustering select_leaders(const WeightedGraph& g, Clustering clustering);

/// k index-contiguous blocks whose sizes differ by at most one; the first
/// n mod k blocks get the extra node.
Clustering balanced_partition(std::size_t n, std::size_t k);

/// Full pipeline: fallback blocks for a degenerate graph, otherwise Louvain,
/// coarsen_to_k, then leader selection.
Clustering cluster_clients(const SimilarityGraph& g, std::size_t k, std::uint64_t seed,
                           WarningLog* warnings = nullptr);

/// {"clusters": [[ids...], ...], "leaders": [ids...]}
void export_clustering_json(const Clustering& c, std::ostream& out);

}  // namespace cefl
