#include <gtest/gtest.h>

#include <sstream>

#include "cefl/clustering.hpp"
#include "cefl/error.hpp"
#include "graphs.hpp"

namespace cefl {
namespace {

using testing::brute_force_two_partition;
using testing::leaders_are_argmax;
using testing::planted_blocks;
using testing::random_similarity_graph;

// Two disjoint edges {0,1} and {2,3} of equal weight.
WeightedGraph two_cliques() { return WeightedGraph(4, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0}); }

TEST(Modularity, SingleClusterIsZero) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = random_similarity_graph(6, seed);
    EXPECT_NEAR(modularity(g.graph(), std::vector<std::size_t>(6, 0)), 0.0, 1e-12);
  }
}

TEST(Modularity, DisconnectedCliquesIsHalf) {
  // Hand evaluation: each clique holds half the edge weight and half the
  // degree, so Q = 2 * (1/2 - 1/4) = 1/2.
  EXPECT_NEAR(modularity(two_cliques(), std::vector<std::size_t>{0, 0, 1, 1}), 0.5, 1e-12);
}

TEST(Modularity, BoundedOnRandomGraphs) {
  Rng rng(1);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = random_similarity_graph(8, seed);
    std::vector<std::size_t> a(8);
    for (auto& c : a) c = rng.below(4);
    const double q = modularity(g.graph(), a);
    EXPECT_GE(q, -0.5);
    EXPECT_LE(q, 1.0);
  }
}

TEST(Modularity, EmptyGraphRejected) {
  EXPECT_THROW(modularity(WeightedGraph(2, {0, 0, 0, 0}), std::vector<std::size_t>{0, 1}),
               InputError);
}

TEST(Louvain, RecoversPlantedBlocks) {
  const std::vector<std::size_t> blocks = {0, 1, 0, 1, 1, 0, 0, 1};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = planted_blocks(blocks, seed);
    const auto best = brute_force_two_partition(g.graph());
    const LouvainResult r = louvain(g.graph(), seed);
    EXPECT_EQ(r.clustering.assignment, canonical_clustering(blocks).assignment);
    EXPECT_EQ(best.assignment, canonical_clustering(blocks).assignment);
  }
}

TEST(Louvain, EveryMoveIncreasesModularity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_similarity_graph(12, seed);
    const LouvainResult r = louvain(g.graph(), seed, {.trace_moves = true});
    std::vector<std::size_t> singletons(12);
    for (std::size_t i = 0; i < 12; ++i) singletons[i] = i;
    double prev = modularity(g.graph(), singletons);
    EXPECT_EQ(r.move_trace.size(), r.moves);
    for (double q : r.move_trace) {
      EXPECT_GT(q, prev - 1e-12);
      prev = q;
    }
    EXPECT_GE(r.modularity, modularity(g.graph(), singletons));
    for (std::size_t i = 1; i < r.level_modularity.size(); ++i) {
      EXPECT_GE(r.level_modularity[i], r.level_modularity[i - 1] - 1e-12);
    }
  }
}

TEST(Louvain, ConstantGraphIsDegenerate) {
  const auto g = SimilarityGraph::from_distances(4, {0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0});
  const LouvainResult r = louvain(g.graph(), 0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.moves, 0u);
  EXPECT_EQ(r.clustering.num_clusters(), 4u);
}

TEST(Louvain, DeterministicPerSeed) {
  const auto g = random_similarity_graph(15, 3);
  EXPECT_EQ(louvain(g.graph(), 5).clustering, louvain(g.graph(), 5).clustering);
}

TEST(CoarsenToK, AlreadyKUnchanged) {
  const std::vector<std::size_t> blocks = {0, 0, 0, 1, 1, 1};
  const auto g = planted_blocks(blocks, 1);
  const Clustering c = canonical_clustering(blocks);
  EXPECT_EQ(coarsen_to_k(g.graph(), c, 2).assignment, c.assignment);
}

TEST(CoarsenToK, MergesLeastLossPair) {
  // Oracle: evaluate modularity after each of the three candidate merges.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_similarity_graph(9, seed + 40);
    const std::vector<std::size_t> three = {0, 0, 0, 1, 1, 1, 2, 2, 2};
    double best_q = -1.0;
    std::vector<std::size_t> best;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        std::vector<std::size_t> merged = three;
        for (auto& c : merged) {
          if (c == b) c = a;
        }
        const double q = modularity(g.graph(), merged);
        if (q > best_q) {
          best_q = q;
          best = merged;
        }
      }
    }
    // The refinement pass may improve further but never below the best merge.
    const Clustering out = coarsen_to_k(g.graph(), canonical_clustering(three), 2);
    EXPECT_EQ(out.num_clusters(), 2u);
    EXPECT_GE(modularity(g.graph(), out.assignment), best_q - 1e-12);
  }
}

TEST(CoarsenToK, KEqualsNIsAllSingletons) {
  const auto g = random_similarity_graph(6, 2);
  const Clustering out = coarsen_to_k(g.graph(), canonical_clustering(std::vector<std::size_t>(6, 0)), 6);
  EXPECT_EQ(out.assignment, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(CoarsenToK, SplitsToReachK) {
  const auto g = random_similarity_graph(10, 3);
  for (std::size_t k = 1; k <= 10; ++k) {
    const Clustering out =
        coarsen_to_k(g.graph(), canonical_clustering(std::vector<std::size_t>(10, 0)), k);
    EXPECT_EQ(out.num_clusters(), k);
    EXPECT_NO_THROW(out.validate());
  }
}

TEST(CoarsenToK, RejectsBadK) {
  const auto g = random_similarity_graph(4, 2);
  const Clustering c = canonical_clustering(std::vector<std::size_t>{0, 1, 2, 3});
  EXPECT_THROW(coarsen_to_k(g.graph(), c, 0), InputError);
  EXPECT_THROW(coarsen_to_k(g.graph(), c, 5), InputError);
}

TEST(CoarsenToK, MatchesBruteForceTwoPartition) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto g = random_similarity_graph(8, 1000 + seed);
    const auto best = brute_force_two_partition(g.graph());
    const LouvainResult lv = louvain(g.graph(), seed);
    const Clustering out = coarsen_to_k(g.graph(), lv.clustering, 2);
    EXPECT_NEAR(modularity(g.graph(), out.assignment), best.modularity, 1e-9) << "seed " << seed;
  }
}

TEST(SelectLeaders, ThreeMemberExample) {
  // S_AB=5, S_AC=3, S_BC=1: sums A 8, B 6, C 4.
  const WeightedGraph g(3, {0, 5, 3, 5, 0, 1, 3, 1, 0});
  const Clustering c = select_leaders(g, canonical_clustering(std::vector<std::size_t>{0, 0, 0}));
  EXPECT_EQ(c.leaders, (std::vector<std::size_t>{0}));
}

TEST(SelectLeaders, SingletonAndTie) {
  const WeightedGraph g(3, {0, 2, 1, 2, 0, 1, 1, 1, 0});
  const Clustering c = select_leaders(g, canonical_clustering(std::vector<std::size_t>{0, 0, 1}));
  EXPECT_EQ(c.leaders, (std::vector<std::size_t>{0, 2}));
}

TEST(SelectLeaders, ArgmaxOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_similarity_graph(10, seed);
    const Clustering c = cluster_clients(g, 3, seed);
    EXPECT_TRUE(leaders_are_argmax(g.graph(), c));
    EXPECT_NO_THROW(c.validate());
  }
}

TEST(BalancedPartition, ContiguousBlocks) {
  const Clustering c = balanced_partition(7, 3);
  EXPECT_EQ(c.assignment, (std::vector<std::size_t>{0, 0, 0, 1, 1, 2, 2}));
}

TEST(ClusterClients, DegenerateFallsBackWithWarning) {
  const auto g = SimilarityGraph::from_distances(4, {0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0});
  WarningLog log;
  const Clustering c = cluster_clients(g, 2, 0, &log);
  EXPECT_TRUE(c.fallback);
  EXPECT_EQ(c.assignment, (std::vector<std::size_t>{0, 0, 1, 1}));
  EXPECT_EQ(c.leaders, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(log.size(), 1u);
}

TEST(ClusterClients, AlwaysExactlyK) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_similarity_graph(12, seed);
    for (std::size_t k = 1; k <= 12; k += 3) {
      const Clustering c = cluster_clients(g, k, seed);
      EXPECT_EQ(c.num_clusters(), k);
      EXPECT_EQ(c.leaders.size(), k);
    }
  }
}

TEST(ExportClustering, Json) {
  Clustering c = canonical_clustering(std::vector<std::size_t>{0, 1, 0});
  c.leaders = {2, 1};
  std::ostringstream out;
  export_clustering_json(c, out);
  EXPECT_NE(out.str().find("\"clusters\":[[0,2],[1]]"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("\"leaders\":[2,1]"), std::string::npos);
}

}  // namespace
}  // namespace cefl
