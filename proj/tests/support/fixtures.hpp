#pragma once

// Small models and shards shared by unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "cefl/data.hpp"
#include "cefl/model.hpp"
#include "cefl/random.hpp"

namespace cefl::testing {

inline std::vector<LayerSpec> tiny_specs(std::size_t in = 4, std::size_t hidden = 3,
                                         std::size_t out = 2) {
  return {{in, hidden, Activation::kRelu}, {hidden, out, Activation::kSoftmax}};
}

/// Random features in [-1, 1] with uniform random labels.
inline Batch random_batch(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  Batch b(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    b.add(x, static_cast<int>(rng.below(classes)));
  }
  return b;
}

/// Two Gaussian blobs at +-center along every axis; label = blob.
inline Batch two_blobs(std::size_t n, std::size_t dim, double center, std::uint64_t seed) {
  Rng rng(seed);
  Batch b(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double c = label == 0 ? -center : center;
    for (double& v : x) v = c + rng.normal(0.0, 0.3);
    b.add(x, label);
  }
  return b;
}

/// Shard with train/test drawn from random_batch, for protocol plumbing tests.
inline ClientShard random_shard(int id, std::size_t n_train, std::size_t n_test, std::size_t dim,
                                std::size_t classes, std::uint64_t seed) {
  ClientShard s;
  s.client_id = id;
  s.train = random_batch(n_train, dim, classes, derive_seed(seed, 1));
  s.test = random_batch(n_test, dim, classes, derive_seed(seed, 2));
  for (int y : s.train.labels()) ++s.class_histogram[static_cast<std::size_t>(y) % kNumClasses];
  return s;
}

}  // namespace cefl::testing
