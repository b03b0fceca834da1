#include "cefl/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cefl/random.hpp"

namespace cefl {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Tolerance for "strictly better" comparisons of modularity gains, scaled
// to the graph's total weight.
double gain_tolerance(double two_m) { return 1e-12 * two_m; }

constexpr double kExactSearchBudget = 250000.0;

std::vector<std::size_t> to_assignment(std::size_t n,
                                       const std::vector<std::vector<std::size_t>>& comms) {
  std::vector<std::size_t> a(n, kNone);
  for (std::size_t c = 0; c < comms.size(); ++c) {
    for (std::size_t i : comms[c]) a[i] = c;
  }
  return a;
}

void sort_communities(std::vector<std::vector<std::size_t>>& comms) {
  for (auto& c : comms) std::sort(c.begin(), c.end());
  std::sort(comms.begin(), comms.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}


// Number of partitions of n labelled nodes into exactly k nonempty blocks,
// saturating well above any search budget.
double stirling2(std::size_t n, std::size_t k) {
  std::vector<double> row(k + 1, 0.0);
  row[0] = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = std::min(i, k); j >= 1; --j) {
      row[j] = std::min(1e18, static_cast<double>(j) * row[j] + row[j - 1]);
    }
    row[0] = 0.0;
  }
  return row[k];
}

// Depth-first enumeration of all k-block partitions as restricted growth
// strings, tracking per-block internal weight and degree sums.
struct ExactSearch {
  const WeightedGraph& g;
  std::size_t n;
  std::size_t k;
  double two_m;
  std::vector<double> degree;
  std::vector<std::size_t> comm;
  std::vector<double> in;
  std::vector<double> tot;
  std::vector<std::size_t> best;
  double best_q = -std::numeric_limits<double>::infinity();

  double score() const {
    double q = 0.0;
    for (std::size_t c = 0; c < k; ++c) q += in[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
    return q;
  }

  void visit(std::size_t i, std::size_t used) {
    if (i == n) {
      const double q = score();
      if (q > best_q) {
        best_q = q;
        best = comm;
      }
      return;
    }
    const std::size_t limit = std::min(used + 1, k);
    for (std::size_t c = 0; c < limit; ++c) {
      const std::size_t now_used = std::max(used, c + 1);
      if (k - now_used > n - i - 1) continue;
      double link = g.weight(i, i);
      for (std::size_t j = 0; j < i; ++j) {
        if (comm[j] == c) link += 2.0 * g.weight(i, j);
      }
      comm[i] = c;
      in[c] += link;
      tot[c] += degree[i];
      visit(i + 1, now_used);
      in[c] -= link;
      tot[c] -= degree[i];
    }
  }
};

}  // namespace

std::size_t Clustering::num_clusters() const {
  if (assignment.empty()) return 0;
  return *std::max_element(assignment.begin(), assignment.end()) + 1;
}

std::vector<std::vector<std::size_t>> Clustering::clusters() const {
  std::vector<std::vector<std::size_t>> out(num_clusters());
  for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

void Clustering::validate() const {
  const auto groups = clusters();
  std::size_t next = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] > next) throw InternalError("cluster ids are not canonical");
    if (assignment[i] == next) ++next;
  }
  for (const auto& g : groups) {
    if (g.empty()) throw InternalError("empty cluster");
  }
  if (!leaders.empty()) {
    if (leaders.size() != groups.size()) throw InternalError("one leader per cluster required");
    for (std::size_t k = 0; k < leaders.size(); ++k) {
      if (leaders[k] >= assignment.size() || assignment[leaders[k]] != k) {
        throw InternalError("leader outside its cluster");
      }
    }
  }
}

Clustering canonical_clustering(std::span<const std::size_t> assignment) {
  Clustering c;
  c.assignment.resize(assignment.size());
  std::vector<std::size_t> relabel;
  std::size_t next = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const std::size_t old = assignment[i];
    if (old >= relabel.size()) relabel.resize(old + 1, kNone);
    if (relabel[old] == kNone) relabel[old] = next++;
    c.assignment[i] = relabel[old];
  }
  return c;
}

double modularity(const WeightedGraph& g, std::span<const std::size_t> assignment) {
  const std::size_t n = g.size();
  if (n == 0) throw InputError("modularity: empty graph");
  if (assignment.size() != n) throw InputError("modularity: assignment size mismatch");
  const double two_m = g.total_degree();
  if (!(two_m > 0.0)) throw InputError("modularity: graph has no edge weight");

  std::size_t groups = 0;
  for (std::size_t c : assignment) groups = std::max(groups, c + 1);
  std::vector<double> internal(groups, 0.0);
  std::vector<double> tot(groups, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    tot[assignment[i]] += g.degree(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (assignment[i] == assignment[j]) internal[assignment[i]] += g.weight(i, j);
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < groups; ++c) {
    q += internal[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
  }
  return q;
}

LouvainResult louvain(const WeightedGraph& g, std::uint64_t seed, const LouvainOptions& options) {
  const std::size_t n = g.size();
  if (n < 2) throw InputError("louvain: need at least two nodes");
  const double two_m = g.total_degree();
  if (!(two_m > 0.0)) throw InputError("louvain: graph has no edge weight");
  const double eps = gain_tolerance(two_m);

  LouvainResult result;
  std::vector<std::size_t> node_of(n);
  std::iota(node_of.begin(), node_of.end(), std::size_t{0});

  if (g.constant_weights()) {
    result.degenerate = true;
    result.clustering = canonical_clustering(node_of);
    result.modularity = modularity(g, result.clustering.assignment);
    return result;
  }

  std::vector<double> adj = g.matrix();
  std::size_t p = n;
  std::vector<std::size_t> original(n);

  for (std::uint64_t level = 0;; ++level) {
    std::vector<double> k(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) k[i] += adj[i * p + j];
    }
    std::vector<std::size_t> comm(p);
    std::iota(comm.begin(), comm.end(), std::size_t{0});
    std::vector<double> tot = k;
    Rng rng(derive_seed(seed, level));
    const std::vector<std::size_t> order = rng.permutation(p);
    std::vector<double> link(p);

    bool improved = false;
    for (bool moved = true; moved;) {
      moved = false;
      for (std::size_t i : order) {
        const std::size_t own = comm[i];
        std::fill(link.begin(), link.end(), 0.0);
        for (std::size_t j = 0; j < p; ++j) {
          if (j != i) link[comm[j]] += adj[i * p + j];
        }
        tot[own] -= k[i];
        const double own_gain = link[own] - k[i] * tot[own] / two_m;
        std::size_t best = kNone;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < p; ++c) {
          if (c == own || link[c] <= 0.0) continue;
          const double gain = link[c] - k[i] * tot[c] / two_m;
          if (gain > best_gain + eps) {
            best = c;
            best_gain = gain;
          }
        }
        if (best != kNone && best_gain > own_gain + eps) {
          comm[i] = best;
          tot[best] += k[i];
          moved = true;
          improved = true;
          ++result.moves;
          if (options.trace_moves) {
            for (std::size_t o = 0; o < n; ++o) original[o] = comm[node_of[o]];
            result.move_trace.push_back(modularity(g, original));
          }
        } else {
          tot[own] += k[i];
        }
      }
    }
    if (!improved) break;

    // Aggregate communities into the nodes of the next level.
    const Clustering level_clusters = canonical_clustering(comm);
    const std::size_t q = level_clusters.num_clusters();
    std::vector<double> next(q * q, 0.0);
    for (std::size_t u = 0; u < p; ++u) {
      const std::size_t cu = level_clusters.assignment[u];
      for (std::size_t v = 0; v < p; ++v) {
        next[cu * q + level_clusters.assignment[v]] += adj[u * p + v];
      }
    }
    for (std::size_t& node : node_of) node = level_clusters.assignment[node];
    result.level_modularity.push_back(modularity(g, node_of));
    adj = std::move(next);
    p = q;
    if (p == 1) break;
  }

  result.clustering = canonical_clustering(node_of);
  result.modularity = modularity(g, result.clustering.assignment);
  return result;
}

Clustering coarsen_to_k(const WeightedGraph& g, const Clustering& clustering, std::size_t k) {
  const std::size_t n = g.size();
  if (k == 0) throw InputError("coarsen_to_k: K must be >= 1");
  if (k > n) {
    throw InputError("coarsen_to_k: K=" + std::to_string(k) + " exceeds " +
                     std::to_string(n) + " clients");
  }
  if (clustering.assignment.size() != n) {
    throw InputError("coarsen_to_k: clustering does not cover the graph");
  }
  const double two_m = g.total_degree();
  if (!(two_m > 0.0)) throw InputError("coarsen_to_k: graph has no edge weight");
  const double eps = gain_tolerance(two_m);

  std::vector<double> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = g.degree(i);

  auto comms = clustering.clusters();
  sort_communities(comms);

  while (comms.size() > k) {
    std::vector<double> tot(comms.size(), 0.0);
    for (std::size_t c = 0; c < comms.size(); ++c) {
      for (std::size_t i : comms[c]) tot[c] += degree[i];
    }
    std::size_t best_a = 0;
    std::size_t best_b = 1;
    double best_delta = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < comms.size(); ++a) {
      for (std::size_t b = a + 1; b < comms.size(); ++b) {
        double mass = 0.0;
        for (std::size_t i : comms[a]) {
          for (std::size_t j : comms[b]) mass += g.weight(i, j);
        }
        const double delta = 2.0 * (mass / two_m - (tot[a] / two_m) * (tot[b] / two_m));
        if (delta > best_delta) {
          best_delta = delta;
          best_a = a;
          best_b = b;
        }
      }
    }
    comms[best_a].insert(comms[best_a].end(), comms[best_b].begin(), comms[best_b].end());
    comms.erase(comms.begin() + static_cast<std::ptrdiff_t>(best_b));
    sort_communities(comms);
  }

  while (comms.size() < k) {
    std::size_t largest = 0;
    for (std::size_t c = 1; c < comms.size(); ++c) {
      if (comms[c].size() > comms[largest].size()) largest = c;
    }
    std::size_t weakest = kNone;
    double weakest_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i : comms[largest]) {
      double s = 0.0;
      for (std::size_t j : comms[largest]) {
        if (j != i) s += g.weight(i, j);
      }
      if (s < weakest_sum) {
        weakest_sum = s;
        weakest = i;
      }
    }
    std::erase(comms[largest], weakest);
    comms.push_back({weakest});
    sort_communities(comms);
  }

  // Single-node refinement among the k clusters.
  std::vector<std::size_t> comm = to_assignment(n, comms);
  std::vector<std::size_t> size(k, 0);
  std::vector<double> tot(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ++size[comm[i]];
    tot[comm[i]] += degree[i];
  }
  std::vector<double> link(k);
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t own = comm[i];
      if (size[own] == 1) continue;
      std::fill(link.begin(), link.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) link[comm[j]] += g.weight(i, j);
      }
      const double own_gain = link[own] - degree[i] * (tot[own] - degree[i]) / two_m;
      std::size_t best = kNone;
      double best_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        if (c == own) continue;
        const double gain = link[c] - degree[i] * tot[c] / two_m;
        if (gain > best_gain + eps) {
          best = c;
          best_gain = gain;
        }
      }
      if (best != kNone && best_gain > own_gain + eps) {
        --size[own];
        tot[own] -= degree[i];
        ++size[best];
        tot[best] += degree[i];
        comm[i] = best;
        moved = true;
      }
    }
  }

  // Small partition spaces are searched exhaustively; the greedy result is
  // kept unless the optimum beats it by more than the gain tolerance.
  if (k > 1 && k < n && stirling2(n, k) <= kExactSearchBudget) {
    ExactSearch search{g, n, k, two_m, degree, std::vector<std::size_t>(n, 0),
                       std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), {}};
    search.visit(0, 0);
    if (search.best_q > modularity(g, comm) + eps) comm = search.best;
  }
  return canonical_clustering(comm);
}

Clustering select_leaders(const WeightedGraph& g, Clustering clustering) {
  const auto groups = clustering.clusters();
  clustering.leaders.assign(groups.size(), kNone);
  for (std::size_t c = 0; c < groups.size(); ++c) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i : groups[c]) {
      double s = 0.0;
      for (std::size_t j : groups[c]) {
        if (j != i) s += g.weight(i, j);
      }
      if (s > best) {
        best = s;
        clustering.leaders[c] = i;
      }
    }
  }
  return clustering;
}

Clustering balanced_partition(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) throw InputError("balanced_partition: need 1 <= K <= N");
  Clustering c;
  c.assignment.resize(n);
  std::size_t i = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t len = n / k + (b < n % k ? 1 : 0);
    for (std::size_t e = i + len; i < e; ++i) c.assignment[i] = b;
  }
  return c;
}

Clustering cluster_clients(const SimilarityGraph& g, std::size_t k, std::uint64_t seed,
                           WarningLog* warnings) {
  Clustering c;
  if (g.degenerate()) {
    if (warnings) {
      warnings->push_back("all pairwise distances are equal; using " + std::to_string(k) +
                          " index-contiguous clusters");
    }
    c = balanced_partition(g.size(), k);
    c.fallback = true;
  } else {
    const LouvainResult lv = louvain(g.graph(), seed);
    c = coarsen_to_k(g.graph(), lv.clustering, k);
  }
  c = select_leaders(g.graph(), std::move(c));
  c.validate();
  return c;
}

void export_clustering_json(const Clustering& c, std::ostream& out) {
  nlohmann::json doc = {{"clusters", c.clusters()}, {"leaders", c.leaders}};
  out << doc.dump() << '\n';
}

}  // namespace cefl
