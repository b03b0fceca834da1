#include "cefl/model.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

#include "cefl/error.hpp"
#include "cefl/random.hpp"

namespace cefl {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

ConstMatrixMap weight_map(const LayerParams& p) {
  return {p.weights.data(), static_cast<Eigen::Index>(p.spec.output_dim),
          static_cast<Eigen::Index>(p.spec.input_dim)};
}

ConstMatrixMap input_map(const Batch& batch) {
  return {batch.feature_data().data(), static_cast<Eigen::Index>(batch.size()),
          static_cast<Eigen::Index>(batch.dim())};
}

struct ForwardPass {
  // pre[l] = H[l-1] * W^T + b, post[l] = act(pre[l]); logits = post.back().
  std::vector<RowMatrix> pre;
  std::vector<RowMatrix> post;
  RowMatrix log_probs;
};

void apply_activation(Activation a, const RowMatrix& z, RowMatrix& h) {
  if (a == Activation::kRelu) {
    h = z.cwiseMax(0.0);
  } else {
    h = z;
  }
}

// Row-wise log-softmax.
RowMatrix log_softmax(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

ForwardPass run_forward(const ModelParams& m, const Batch& batch) {
  if (batch.dim() != m.input_dim()) {
    throw InputError("input dimension " + std::to_string(batch.dim()) +
                     " does not match model input " +
                     std::to_string(m.input_dim()));
  }
  ForwardPass fp;
  fp.pre.resize(m.num_layers());
  fp.post.resize(m.num_layers());
  const ConstMatrixMap x = input_map(batch);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const LayerParams& p = m.layer(l);
    const ConstVectorMap b(p.bias.data(), static_cast<Eigen::Index>(p.bias.size()));
    if (l == 0) {
      fp.pre[l].noalias() = x * weight_map(p).transpose();
    } else {
      fp.pre[l].noalias() = fp.post[l - 1] * weight_map(p).transpose();
    }
    fp.pre[l].rowwise() += b.transpose();
    apply_activation(p.spec.activation, fp.pre[l], fp.post[l]);
  }
  fp.log_probs = log_softmax(fp.post.back());
  return fp;
}

std::size_t argmax_row(const RowMatrix& m, Eigen::Index r) {
  // First maximum wins, which is the lowest class index on ties.
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(r, c) > m(r, best)) best = c;
  }
  return static_cast<std::size_t>(best);
}

void check_labels(const ModelParams& m, const Batch& batch) {
  const auto classes = static_cast<int>(m.output_dim());
  for (int y : batch.labels()) {
    if (y < 0 || y >= classes) {
      throw InputError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kSoftmax:
      return "softmax";
    case Activation::kIdentity:
      return "identity";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "softmax") return Activation::kSoftmax;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

void validate_specs(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw ConfigError("model needs at least one layer");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const LayerSpec& s = specs[l];
    if (s.input_dim == 0 || s.output_dim == 0) {
      throw ConfigError("layer " + std::to_string(l) + ": dimensions must be >= 1");
    }
    if (l > 0 && s.input_dim != specs[l - 1].output_dim) {
      throw ConfigError("layer " + std::to_string(l) + ": input_dim " +
                        std::to_string(s.input_dim) +
                        " does not match previous output_dim " +
                        std::to_string(specs[l - 1].output_dim));
    }
    if (s.activation == Activation::kSoftmax && l + 1 != specs.size()) {
      throw ConfigError("layer " + std::to_string(l) +
                        ": softmax is only allowed on the final layer");
    }
  }
}

ModelParams::ModelParams(std::vector<LayerParams> layers) : layers_(std::move(layers)) {
  std::vector<LayerSpec> s = specs();
  validate_specs(s);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerParams& p = layers_[l];
    if (p.weights.size() != p.spec.input_dim * p.spec.output_dim ||
        p.bias.size() != p.spec.output_dim) {
      throw ConfigError("layer " + std::to_string(l) +
                        ": parameter block does not match its spec");
    }
  }
}

ModelParams ModelParams::zeros(std::span<const LayerSpec> specs) {
  std::vector<LayerParams> layers;
  layers.reserve(specs.size());
  for (const LayerSpec& s : specs) {
    layers.push_back({s, std::vector<double>(s.input_dim * s.output_dim, 0.0),
                      std::vector<double>(s.output_dim, 0.0)});
  }
  return ModelParams(std::move(layers));
}

std::vector<LayerSpec> ModelParams::specs() const {
  std::vector<LayerSpec> out;
  out.reserve(layers_.size());
  for (const auto& p : layers_) out.push_back(p.spec);
  return out;
}

std::size_t ModelParams::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().spec.input_dim;
}

std::size_t ModelParams::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().spec.output_dim;
}

std::size_t ModelParams::num_params() const {
  std::size_t n = 0;
  for (const auto& p : layers_) n += p.num_params();
  return n;
}

std::vector<double> ModelParams::flat_layer(std::size_t l) const {
  const LayerParams& p = layer(l);
  std::vector<double> flat;
  flat.reserve(p.num_params());
  flat.insert(flat.end(), p.weights.begin(), p.weights.end());
  flat.insert(flat.end(), p.bias.begin(), p.bias.end());
  return flat;
}

void ModelParams::set_flat_layer(std::size_t l, std::span<const double> flat) {
  LayerParams& p = layer(l);
  if (flat.size() != p.num_params()) {
    throw InputError("flat layer " + std::to_string(l) + " has length " +
                     std::to_string(flat.size()) + ", expected " +
                     std::to_string(p.num_params()));
  }
  std::copy_n(flat.begin(), p.weights.size(), p.weights.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(p.weights.size()),
            flat.end(), p.bias.begin());
}

bool ModelParams::same_structure(const ModelParams& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (!(layers_[l].spec == other.layers_[l].spec)) return false;
  }
  return true;
}

ModelParams init_model(std::span<const LayerSpec> specs, std::uint64_t seed) {
  ModelParams m = ModelParams::zeros(specs);
  Rng rng(seed);
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    LayerParams& p = m.layer(l);
    const double limit = std::sqrt(
        6.0 / static_cast<double>(p.spec.input_dim + p.spec.output_dim));
    for (double& w : p.weights) w = rng.uniform(-limit, limit);
  }
  return m;
}

void Batch::add(std::span<const double> features, int label) {
  if (features.size() != dim_) {
    throw InputError("feature vector of length " + std::to_string(features.size()) +
                     " added to batch of dimension " + std::to_string(dim_));
  }
  if (label < 0) throw InputError("negative label");
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
}

Batch Batch::subset(std::span<const std::size_t> indices) const {
  Batch out(dim_);
  out.features_.reserve(indices.size() * dim_);
  out.labels_.reserve(indices.size());
  for (std::size_t i : indices) out.add(features(i), labels_.at(i));
  return out;
}

std::vector<double> forward(const ModelParams& m, std::span<const double> x) {
  if (x.size() != m.input_dim()) {
    throw InputError("input of length " + std::to_string(x.size()) +
                     " does not match model input " + std::to_string(m.input_dim()));
  }
  Batch one(x.size());
  one.add(x, 0);
  return predict_proba(m, one);
}

std::vector<double> predict_proba(const ModelParams& m, const Batch& batch) {
  const ForwardPass fp = run_forward(m, batch);
  const RowMatrix probs = fp.log_probs.array().exp().matrix();
  return {probs.data(), probs.data() + probs.size()};
}

LossAndGrads loss_and_grads(const ModelParams& m, const Batch& batch) {
  if (batch.empty()) throw InputError("loss_and_grads: empty batch");
  check_labels(m, batch);
  const ForwardPass fp = run_forward(m, batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  LossAndGrads out{0.0, ModelParams::zeros(m.specs()), 0};
  // d(loss)/d(logits) = (softmax - onehot) / n
  RowMatrix grad = fp.log_probs.array().exp().matrix();
  for (Eigen::Index r = 0; r < n; ++r) {
    const int y = batch.label(static_cast<std::size_t>(r));
    out.loss -= fp.log_probs(r, y);
    grad(r, y) -= 1.0;
    if (argmax_row(fp.log_probs, r) == static_cast<std::size_t>(y)) ++out.correct;
  }
  out.loss *= inv_n;
  grad *= inv_n;

  const ConstMatrixMap x = input_map(batch);
  for (std::size_t l = m.num_layers(); l-- > 0;) {
    const LayerParams& p = m.layer(l);
    if (p.spec.activation == Activation::kRelu) {
      grad = (fp.pre[l].array() > 0.0).select(grad.array(), 0.0).matrix();
    }
    LayerParams& g = out.grads.layer(l);
    MatrixMap dw(g.weights.data(), static_cast<Eigen::Index>(p.spec.output_dim),
                 static_cast<Eigen::Index>(p.spec.input_dim));
    if (l == 0) {
      dw.noalias() = grad.transpose() * x;
    } else {
      dw.noalias() = grad.transpose() * fp.post[l - 1];
    }
    VectorMap db(g.bias.data(), static_cast<Eigen::Index>(g.bias.size()));
    db = grad.colwise().sum().transpose();
    if (l > 0) {
      RowMatrix next = grad * weight_map(p);
      grad.swap(next);
    }
  }
  return out;
}

double evaluate(const ModelParams& m, const Batch& batch) {
  if (batch.empty()) throw InputError("evaluate: empty batch");
  const ForwardPass fp = run_forward(m, batch);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < fp.log_probs.rows(); ++r) {
    if (argmax_row(fp.log_probs, r) ==
        static_cast<std::size_t>(batch.label(static_cast<std::size_t>(r)))) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) {
    throw ConfigError("adam_beta1 must lie in (0, 1)");
  }
  if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam_beta2 must lie in (0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
}

AdamState AdamState::for_model(const ModelParams& m) {
  const auto s = m.specs();
  return {ModelParams::zeros(s), ModelParams::zeros(s), 0};
}

void adam_step(ModelParams& m, const ModelParams& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (!m.same_structure(grads) || !m.same_structure(state.first_moment) ||
      !m.same_structure(state.second_moment)) {
    throw InternalError("adam_step: parameter, gradient and state shapes differ");
  }
  ++state.step;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double lr = cfg.learning_rate;
  const double eps = cfg.adam_epsilon;

  auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                    std::vector<double>& mom1, std::vector<double>& mom2) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      mom1[i] = b1 * mom1[i] + (1.0 - b1) * g[i];
      mom2[i] = b2 * mom2[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = mom1[i] / c1;
      const double vhat = mom2[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  };
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    LayerParams& p = m.layer(l);
    const LayerParams& g = grads.layer(l);
    LayerParams& m1 = state.first_moment.layer(l);
    LayerParams& m2 = state.second_moment.layer(l);
    update(p.weights, g.weights, m1.weights, m2.weights);
    update(p.bias, g.bias, m1.bias, m2.bias);
  }
}

}  // namespace cefl
