#include <gtest/gtest.h>

#include <sstream>

#include "cefl/error.hpp"
#include "cefl/similarity.hpp"
#include "fixtures.hpp"
#include "graphs.hpp"

namespace cefl {
namespace {

ModelParams single_layer(std::vector<double> weights, std::vector<double> bias) {
  LayerParams p;
  p.spec = {weights.size() / bias.size(), bias.size(), Activation::kIdentity};
  p.weights = std::move(weights);
  p.bias = std::move(bias);
  return ModelParams({p});
}

TEST(PairDistance, IdentityIsZero) {
  const ModelParams m = init_model(testing::tiny_specs(), 3);
  EXPECT_EQ(pair_distance(m, m), 0.0);
}

TEST(PairDistance, ThreeFourFive) {
  const ModelParams a = single_layer({0.0}, {0.0});
  const ModelParams b = single_layer({3.0}, {4.0});
  EXPECT_DOUBLE_EQ(pair_distance(a, b), 5.0);
}

TEST(PairDistance, SumsPerLayerNorms) {
  ModelParams a = ModelParams::zeros(testing::tiny_specs(1, 1, 1));
  ModelParams b = a;
  b.set_flat_layer(0, std::vector<double>{3.0, 0.0});
  b.set_flat_layer(1, std::vector<double>{0.0, 4.0});
  EXPECT_DOUBLE_EQ(pair_distance(a, b), 7.0);  // not sqrt(9 + 16)
}

TEST(PairDistance, StructureMismatch) {
  EXPECT_THROW(pair_distance(init_model(testing::tiny_specs(4, 3, 2), 1),
                             init_model(testing::tiny_specs(4, 5, 2), 1)),
               InputError);
}

TEST(SimilarityGraph, ThreeClientExample) {
  // d: AB=1, AC=3, BC=5
  const SimilarityGraph g =
      SimilarityGraph::from_distances(3, {0, 1, 3, 1, 0, 5, 3, 5, 0});
  EXPECT_EQ(g.d_min(), 1.0);
  EXPECT_EQ(g.d_max(), 5.0);
  EXPECT_EQ(g.similarity(0, 1), 5.0);
  EXPECT_EQ(g.similarity(0, 2), 3.0);
  EXPECT_EQ(g.similarity(1, 2), 1.0);
  EXPECT_EQ(g.similarity(1, 1), 0.0);
}

TEST(SimilarityGraph, IdentityAndRangeInvariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SimilarityGraph g = testing::random_similarity_graph(7, seed);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) {
        if (i == j) continue;
        EXPECT_DOUBLE_EQ(g.similarity(i, j) + g.distance(i, j), g.d_min() + g.d_max());
        EXPECT_GE(g.similarity(i, j), g.d_min());
        EXPECT_LE(g.similarity(i, j), g.d_max());
        EXPECT_EQ(g.similarity(i, j), g.similarity(j, i));
      }
    }
  }
}

TEST(SimilarityGraph, OrderingReversal) {
  const SimilarityGraph g = testing::random_similarity_graph(6, 4);
  for (std::size_t a = 0; a < 36; ++a) {
    for (std::size_t b = 0; b < 36; ++b) {
      const std::size_t i = a / 6, j = a % 6, k = b / 6, l = b % 6;
      if (i == j || k == l) continue;
      EXPECT_EQ(g.distance(i, j) < g.distance(k, l), g.similarity(i, j) > g.similarity(k, l));
    }
  }
}

TEST(SimilarityGraph, ConstantShiftKeepsOrdering) {
  std::vector<double> d = {0, 1, 3, 1, 0, 5, 3, 5, 0};
  std::vector<double> shifted = d;
  for (std::size_t i = 0; i < 9; ++i) {
    if (i % 4 != 0) shifted[i] += 2.5;
  }
  const auto g = SimilarityGraph::from_distances(3, d);
  const auto h = SimilarityGraph::from_distances(3, shifted);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t l = 0; l < 3; ++l) {
          if (i == j || k == l) continue;
          EXPECT_EQ(g.similarity(i, j) < g.similarity(k, l),
                    h.similarity(i, j) < h.similarity(k, l));
        }
      }
    }
  }
}

TEST(SimilarityGraph, DegenerateWhenAllEqual) {
  const auto g = SimilarityGraph::from_distances(3, {0, 2, 2, 2, 0, 2, 2, 2, 0});
  EXPECT_TRUE(g.degenerate());
  EXPECT_EQ(g.similarity(0, 1), 2.0);
  EXPECT_TRUE(g.graph().constant_weights());
}

TEST(BuildGraph, NeedsTwoModels) {
  const std::vector<ModelParams> one = {init_model(testing::tiny_specs(), 1)};
  EXPECT_THROW(build_graph(one), InputError);
}

TEST(BuildGraph, PermutationEquivariant) {
  std::vector<ModelParams> models;
  for (std::uint64_t s = 0; s < 5; ++s) models.push_back(init_model(testing::tiny_specs(), s));
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<ModelParams> permuted;
  for (std::size_t p : perm) permuted.push_back(models[p]);
  const SimilarityGraph g = build_graph(models);
  const SimilarityGraph h = build_graph(permuted);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(h.distance(i, j), g.distance(perm[i], perm[j]));
      EXPECT_EQ(h.similarity(i, j), g.similarity(perm[i], perm[j]));
    }
  }
}

TEST(WeightedGraph, RejectsInvalidMatrices) {
  EXPECT_THROW(WeightedGraph(2, {0, 1, 2, 0}), InputError);   // asymmetric
  EXPECT_THROW(WeightedGraph(2, {1, 1, 1, 0}), InputError);   // diagonal
  EXPECT_THROW(WeightedGraph(2, {0, -1, -1, 0}), InputError);  // negative
  EXPECT_THROW(WeightedGraph(2, {0, 1, 1}), InputError);       // size
}

TEST(ExportEdgeList, OneLinePerPair) {
  const auto g = SimilarityGraph::from_distances(3, {0, 1, 3, 1, 0, 5, 3, 5, 0});
  std::ostringstream out;
  export_edge_list(g, out);
  EXPECT_EQ(out.str(), "0 1 1 5\n0 2 3 3\n1 2 5 1\n");
}

}  // namespace
}  // namespace cefl
