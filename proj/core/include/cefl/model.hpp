#pragma once

// Dense layered classifier used by every protocol: parameters, forward and
// backward passes, mean cross-entropy, and Adam.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cefl {

enum class Activation { kRelu, kSoftmax, kIdentity };

std::string_view to_string(Activation a);
/// Accepts "relu", "softmax", "identity". Throws ConfigError otherwise.
Activation activation_from_string(std::string_view name);

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::kRelu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Throws ConfigError unless every dimension is positive, the layers chain
/// (input_dim of layer l equals output_dim of layer l-1), and softmax
/// appears on the final layer only.
void validate_specs(std::span<const LayerSpec> specs);

/// One layer's parameter block. Weights are output_dim x input_dim, row-major.
struct LayerParams {
  LayerSpec spec;
  std::vector<double> weights;
  std::vector<double> bias;

  std::size_t num_params() const { return weights.size() + bias.size(); }

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Half-open interval [begin, end) of zero-based layer indices.
/// Base layers 1..B in the usual one-based notation are {0, B}.
struct LayerRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t l) const { return l >= begin && l < end; }

  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

class ModelParams {
 public:
  ModelParams() = default;

  /// Validates the block shapes against their specs and the layer chain.
  explicit ModelParams(std::vector<LayerParams> layers);

  /// All weights and biases zero.
  static ModelParams zeros(std::span<const LayerSpec> specs);

  std::size_t num_layers() const { return layers_.size(); }
  const LayerParams& layer(std::size_t l) const { return layers_.at(l); }
  LayerParams& layer(std::size_t l) { return layers_.at(l); }
  const std::vector<LayerParams>& layers() const { return layers_; }

  std::vector<LayerSpec> specs() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_params() const;

  LayerRange all_layers() const { return {0, layers_.size()}; }

  /// Layer l as one vector: weights in row-major order followed by the bias.
  std::vector<double> flat_layer(std::size_t l) const;
  std::size_t flat_layer_size(std::size_t l) const { return layer(l).num_params(); }
  /// Inverse of flat_layer. Throws InputError on a length mismatch.
  void set_flat_layer(std::size_t l, std::span<const double> flat);

  /// Same layer count and identical specs.
  bool same_structure(const ModelParams& other) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<LayerParams> layers_;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// Weights are drawn layer by layer in row-major order from one seeded stream.
ModelParams init_model(std::span<const LayerSpec> specs, std::uint64_t seed);

/// A set of labelled feature vectors stored row-major.
class Batch {
 public:
  Batch() = default;
  explicit Batch(std::size_t dim) : dim_(dim) {}

  /// Throws InputError if features.size() != dim() or label < 0.
  void add(std::span<const double> features, int label);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  int label(std::size_t i) const { return labels_[i]; }

  const std::vector<double>& feature_data() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

  Batch subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Batch&, const Batch&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> features_;
  std::vector<int> labels_;
};

/// Class probabilities for one input. The final layer's output is treated as
/// logits and normalised with a softmax whatever its activation tag.
std::vector<double> forward(const ModelParams& m, std::span<const double> x);

/// Row-major size() x output_dim() probability matrix.
std::vector<double> predict_proba(const ModelParams& m, const Batch& batch);

struct LossAndGrads {
  double loss = 0.0;
  ModelParams grads;
  /// Argmax-correct predictions in the batch, computed from the same pass.
  std::size_t correct = 0;
};

/// Mean cross-entropy over the batch and its gradient.
LossAndGrads loss_and_grads(const ModelParams& m, const Batch& batch);

/// Fraction of argmax-correct predictions; ties go to the lowest class index.
double evaluate(const ModelParams& m, const Batch& batch);

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  /// Throws ConfigError on lr <= 0, batch_size == 0, betas outside (0, 1)
  /// or epsilon <= 0.
  void validate() const;
};

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t step = 0;

  static AdamState for_model(const ModelParams& m);
};

/// One bias-corrected Adam update of m in place.
void adam_step(ModelParams& m, const ModelParams& grads, AdamState& state,
               const TrainConfig& cfg);

}  // namespace cefl
