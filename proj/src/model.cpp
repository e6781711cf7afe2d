/* Copyright 2026 The Seedscan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "seedscan/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>

#include "seedscan/errors.hpp"
#include "seedscan/rng.hpp"

namespace seedscan {

namespace {

const char* const kConvWeight[3] = {"conv1.weight", "conv2.weight", "conv3.weight"};
const char* const kConvBias[3] = {"conv1.bias", "conv2.bias", "conv3.bias"};

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void fill_uniform(Tensor& t, Rng& rng, double limit) {
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
}

ConvSpec spec_from_weights(const Tensor& weights) {
  require_rank(weights, 4, "conv weights");
  ConvSpec spec;
  spec.out_channels = weights.dim(0);
  spec.in_channels = weights.dim(1);
  spec.kernel_height = weights.dim(2);
  spec.kernel_width = weights.dim(3);
  spec.stride = 1;
  spec.padding = weights.dim(2) / 2;
  return spec;
}

// Adds bias[j] to every row of an N x J matrix.
void add_row_bias(Tensor& m, const Tensor& bias) {
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m[i * cols + j] += bias[j];
  }
}

// Column sums of an N x J matrix, accumulated in row order.
Tensor column_sums(const Tensor& m) {
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  Tensor out({cols});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[j] += m[i * cols + j];
  }
  return out;
}

}  // namespace

double encode_label(KernelLabel label) noexcept {
  return label == KernelLabel::kNormal ? 1.0 : 0.0;
}

std::string_view label_name(KernelLabel label) noexcept {
  return label == KernelLabel::kNormal ? "Normal" : "Abnormal";
}

KernelLabel parse_label(std::string_view text) {
  const std::string t = lower(text);
  if (t == "normal") return KernelLabel::kNormal;
  if (t == "abnormal") return KernelLabel::kAbnormal;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

KernelLabel classify(double probability) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw ValidationError("probability " + std::to_string(probability) +
                          " outside [0, 1]");
  }
  return probability <= 0.5 ? KernelLabel::kAbnormal : KernelLabel::kNormal;
}

double accuracy(std::span<const KernelLabel> predictions,
                std::span<const KernelLabel> actuals) {
  if (predictions.empty()) throw ValidationError("accuracy of an empty list");
  if (predictions.size() != actuals.size()) {
    throw ValidationError("accuracy: " + std::to_string(predictions.size()) +
                          " predictions vs " + std::to_string(actuals.size()) +
                          " actual labels");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == actuals[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

// ---------------------------------------------------------------------------

void ModelConfig::validate() const {
  if (input_channels == 0) throw ConfigError("input_channels must be positive");
  if (input_height == 0 || input_width == 0 || input_height % 8 != 0 ||
      input_width % 8 != 0) {
    throw ConfigError("input size " + std::to_string(input_height) + "x" +
                      std::to_string(input_width) +
                      " must be positive and divisible by 8 (three 2x2 pools)");
  }
  for (std::size_t f : filters) {
    if (f == 0) throw ConfigError("filter counts must be positive");
  }
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw ConfigError("kernel_size must be odd, got " + std::to_string(kernel_size));
  }
  if (dense_width == 0) throw ConfigError("dense_width must be positive");
}

ConvSpec ModelConfig::conv_spec(std::size_t block) const {
  ConvSpec spec;
  spec.in_channels = block == 0 ? input_channels : filters[block - 1];
  spec.out_channels = filters[block];
  spec.kernel_height = kernel_size;
  spec.kernel_width = kernel_size;
  spec.stride = 1;
  spec.padding = kernel_size / 2;
  return spec;
}

std::size_t ModelConfig::flatten_width() const {
  return filters[2] * (input_height / 8) * (input_width / 8);
}

std::size_t ModelConfig::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    const ConvSpec spec = conv_spec(b);
    count += spec.out_channels * spec.patch_size() + spec.out_channels;
  }
  count += flatten_width() * dense_width + dense_width;
  count += dense_width + 1;
  return count;
}

// ---------------------------------------------------------------------------

void ModelParameters::add(std::string name, Tensor value) {
  if (contains(name)) throw UsageError("duplicate parameter '" + name + "'");
  entries_.push_back({std::move(name), std::move(value)});
}

bool ModelParameters::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

Tensor& ModelParameters::at(std::string_view name) {
  for (Entry& e : entries_) {
    if (e.name == name) return e.value;
  }
  throw UsageError("no parameter named '" + std::string(name) + "'");
}

const Tensor& ModelParameters::at(std::string_view name) const {
  return const_cast<ModelParameters*>(this)->at(name);
}

std::size_t ModelParameters::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.value.size();
  return n;
}

ModelParameters ModelParameters::zeros_like() const {
  ModelParameters out;
  for (const Entry& e : entries_) out.add(e.name, Tensor::zeros_like(e.value));
  return out;
}

void ModelParameters::require_compatible(const ModelParameters& other,
                                         const char* what) const {
  if (entries_.size() != other.entries_.size()) {
    throw UsageError(std::string(what) + ": " + std::to_string(entries_.size()) +
                     " tensors vs " + std::to_string(other.entries_.size()));
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& a = entries_[i];
    const Entry& b = other.entries_[i];
    if (a.name != b.name || a.value.shape() != b.value.shape()) {
      throw UsageError(std::string(what) + ": '" + a.name + "' " +
                       shape_to_string(a.value.shape()) + " vs '" + b.name + "' " +
                       shape_to_string(b.value.shape()));
    }
  }
}

std::uint64_t ModelParameters::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    h ^= word;
    h *= 0x100000001b3ULL;
  };
  for (const Entry& e : entries_) {
    for (char c : e.name) mix(static_cast<unsigned char>(c));
    for (std::size_t d : e.value.shape()) mix(d);
    for (double v : e.value.data()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      mix(bits);
    }
  }
  return h;
}

ModelParameters build_model(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  ModelParameters params;
  for (std::size_t b = 0; b < 3; ++b) {
    const ConvSpec spec = config.conv_spec(b);
    Tensor w(spec.weight_shape());
    fill_uniform(w, rng, std::sqrt(6.0 / static_cast<double>(spec.patch_size())));
    params.add(kConvWeight[b], std::move(w));
    params.add(kConvBias[b], Tensor({spec.out_channels}));
  }
  const std::size_t flat = config.flatten_width();
  Tensor w1({config.dense_width, flat});
  fill_uniform(w1, rng, std::sqrt(6.0 / static_cast<double>(flat)));
  params.add("dense1.weight", std::move(w1));
  params.add("dense1.bias", Tensor({config.dense_width}));

  Tensor w2({1, config.dense_width});
  fill_uniform(w2, rng, std::sqrt(6.0 / static_cast<double>(config.dense_width + 1)));
  params.add("dense2.weight", std::move(w2));
  params.add("dense2.bias", Tensor({1}));
  return params;
}

// ---------------------------------------------------------------------------

ForwardResult forward(const ModelParameters& params, const Tensor& batch) {
  require_rank(batch, 4, "model input");
  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.params_fingerprint = params.fingerprint();
  cache.batch = batch.dim(0);

  Tensor x = batch;
  for (std::size_t b = 0; b < 3; ++b) {
    const Tensor& w = params.at(kConvWeight[b]);
    const ConvSpec spec = spec_from_weights(w);
    Conv2dResult conv = conv2d_forward(x, w, params.at(kConvBias[b]), spec);
    cache.conv[b] = std::move(conv.cache);
    MaxPoolResult pooled = maxpool2d_forward(relu(conv.output));
    cache.conv_out[b] = std::move(conv.output);
    cache.pool[b] = std::move(pooled.cache);
    x = std::move(pooled.output);
  }
  cache.pooled_shape = x.shape();

  const Tensor& w1 = params.at("dense1.weight");
  const std::size_t n = cache.batch;
  const std::size_t flat_width = x.size() / n;
  if (flat_width != w1.dim(1)) {
    throw DimensionError("input " + shape_to_string(batch.shape()) + " flattens to " +
                         std::to_string(flat_width) + " features, dense layer expects " +
                         std::to_string(w1.dim(1)));
  }
  cache.flat = std::move(x).reshaped({n, flat_width});
  cache.hidden_pre = matmul(cache.flat, transpose(w1));
  add_row_bias(cache.hidden_pre, params.at("dense1.bias"));
  cache.hidden = relu(cache.hidden_pre);

  Tensor logits = matmul(cache.hidden, transpose(params.at("dense2.weight")));
  add_row_bias(logits, params.at("dense2.bias"));
  cache.logits = std::move(logits).reshaped({n});
  result.probabilities = sigmoid(cache.logits);
  return result;
}

Tensor predict(const ModelParameters& params, const Tensor& batch, std::size_t chunk) {
  require_rank(batch, 4, "model input");
  if (chunk == 0) throw UsageError("predict chunk must be positive");
  const std::size_t n = batch.dim(0);
  const std::size_t per_sample = batch.size() / n;
  Tensor out({n});
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t count = std::min(chunk, n - start);
    Shape shape = batch.shape();
    shape[0] = count;
    std::vector<double> slice(batch.raw() + start * per_sample,
                              batch.raw() + (start + count) * per_sample);
    const Tensor probs = forward(params, Tensor(shape, std::move(slice))).probabilities;
    std::copy(probs.raw(), probs.raw() + count, out.raw() + start);
  }
  return out;
}

ModelParameters backward(const ModelParameters& params, const ForwardCache& cache,
                         const Tensor& probability_grad) {
  if (cache.batch == 0) throw UsageError("backward called with an empty forward cache");
  if (probability_grad.rank() != 1 || probability_grad.dim(0) != cache.batch) {
    throw UsageError("backward: gradient " + shape_to_string(probability_grad.shape()) +
                     " does not match cached batch of " + std::to_string(cache.batch));
  }
  if (params.fingerprint() != cache.params_fingerprint) {
    throw UsageError("backward: forward cache is stale (parameters changed since forward)");
  }
  const std::size_t n = cache.batch;
  ModelParameters grads = params.zeros_like();

  Tensor dlogits = sigmoid_backward(cache.logits, probability_grad).reshaped({n, 1});
  grads.at("dense2.weight") = matmul(transpose(dlogits), cache.hidden);
  grads.at("dense2.bias") = column_sums(dlogits);

  Tensor dhidden = matmul(dlogits, params.at("dense2.weight"));
  Tensor dhidden_pre = relu_backward(cache.hidden_pre, dhidden);
  grads.at("dense1.weight") = matmul(transpose(dhidden_pre), cache.flat);
  grads.at("dense1.bias") = column_sums(dhidden_pre);

  Tensor dx = matmul(dhidden_pre, params.at("dense1.weight")).reshaped(cache.pooled_shape);
  for (std::size_t b = 3; b-- > 0;) {
    Tensor dpre = relu_backward(cache.conv_out[b], maxpool2d_backward(cache.pool[b], dx));
    Conv2dGradients g = conv2d_backward(cache.conv[b], dpre, b > 0);
    grads.at(kConvWeight[b]) = std::move(g.weights);
    grads.at(kConvBias[b]) = std::move(g.bias);
    dx = std::move(g.input);
  }
  return grads;
}

// ---------------------------------------------------------------------------

LossResult bce_loss(const Tensor& probabilities, const Tensor& targets) {
  require_rank(probabilities, 1, "bce_loss probabilities");
  require_same_shape(probabilities, targets, "bce_loss");
  const std::size_t n = probabilities.size();
  LossResult result{0.0, Tensor({n})};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = targets[i];
    if (y != 0.0 && y != 1.0) {
      throw ValidationError("bce_loss target " + std::to_string(y) + " at index " +
                            std::to_string(i) + " is not 0 or 1");
    }
    const double p = probabilities[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("bce_loss probability " + std::to_string(p) + " at index " +
                            std::to_string(i) + " outside [0, 1]");
    }
    const double pc = std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
    result.loss -= y * std::log(pc) + (1.0 - y) * std::log1p(-pc);
    result.grad[i] = (pc - y) / (pc * (1.0 - pc)) * inv_n;
  }
  result.loss *= inv_n;
  return result;
}

// ---------------------------------------------------------------------------

std::string_view optimizer_name(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view text) {
  const std::string t = lower(text);
  if (t == "sgd") return OptimizerKind::kSgd;
  if (t == "adam") return OptimizerKind::kAdam;
  throw ValidationError("unknown optimizer '" + std::string(text) +
                        "' (expected sgd or adam)");
}

void optimizer_step(ModelParameters& params, const ModelParameters& grads,
                    OptimizerState& state, const OptimizerConfig& config) {
  params.require_compatible(grads, "optimizer_step gradients");
  const double lr = config.learning_rate;
  ++state.step;

  if (config.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.tensor_count(); ++i) {
      Tensor& p = params.entries()[i].value;
      const Tensor& g = grads.entries()[i].value;
      for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
    }
    return;
  }

  if (state.first_moment.tensor_count() == 0) {
    state.first_moment = params.zeros_like();
    state.second_moment = params.zeros_like();
  }
  params.require_compatible(state.first_moment, "optimizer_step state");
  const double b1 = config.beta1, b2 = config.beta2;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    Tensor& p = params.entries()[i].value;
    const Tensor& g = grads.entries()[i].value;
    Tensor& m = state.first_moment.entries()[i].value;
    Tensor& v = state.second_moment.entries()[i].value;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace seedscan
