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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seedscan/kernels.hpp"
#include "seedscan/tensor.hpp"

namespace seedscan {

// ---------------------------------------------------------------------------
// Labels and the decision rule
// ---------------------------------------------------------------------------

enum class KernelLabel { kAbnormal, kNormal };

/// Normal -> 1.0, Abnormal -> 0.0.
double encode_label(KernelLabel label) noexcept;
std::string_view label_name(KernelLabel label) noexcept;
/// Accepts "Normal"/"Abnormal" in any letter case.
KernelLabel parse_label(std::string_view text);

/// probability <= 0.5 is Abnormal, anything above is Normal. This is the only
/// place the threshold is applied.
KernelLabel classify(double probability);

/// Fraction of positions where the two label lists agree.
double accuracy(std::span<const KernelLabel> predictions,
                std::span<const KernelLabel> actuals);

// ---------------------------------------------------------------------------
// Architecture
// ---------------------------------------------------------------------------

/// Three conv blocks (conv -> relu -> 2x2 max pool), a ReLU hidden dense
/// layer and a single sigmoid output.
struct ModelConfig {
  std::size_t input_height = 64;
  std::size_t input_width = 64;
  std::size_t input_channels = 3;
  std::array<std::size_t, 3> filters{16, 32, 64};
  std::size_t kernel_size = 3;
  std::size_t dense_width = 64;
  std::uint64_t seed = 42;

  /// Throws ConfigError when the config cannot describe a valid network.
  void validate() const;
  /// "same" convolutions: stride 1, padding kernel_size / 2.
  ConvSpec conv_spec(std::size_t block) const;
  /// filters[2] * (H / 8) * (W / 8).
  std::size_t flatten_width() const;
  /// Closed-form number of scalar parameters.
  std::size_t parameter_count() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named parameter tensors in layer order.
class ModelParameters {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  void add(std::string name, Tensor value);
  bool contains(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  std::vector<Entry>& entries() noexcept { return entries_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t tensor_count() const noexcept { return entries_.size(); }
  std::size_t scalar_count() const noexcept;

  /// Zero tensors with identical names and shapes.
  ModelParameters zeros_like() const;
  /// Throws UsageError unless names and shapes match `other` exactly.
  void require_compatible(const ModelParameters& other, const char* what) const;
  /// FNV-1a over names, shapes and value bits.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Initializes parameters for `config`: He-uniform for layers feeding a ReLU,
/// Glorot-uniform for the output layer, zero biases. Deterministic in
/// config.seed.
ModelParameters build_model(const ModelConfig& config);

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

struct ForwardCache {
  std::uint64_t params_fingerprint = 0;
  std::size_t batch = 0;
  std::array<Conv2dCache, 3> conv;
  std::array<Tensor, 3> conv_out;  // pre-activation
  std::array<MaxPoolCache, 3> pool;
  Shape pooled_shape;
  Tensor flat;        // N x D
  Tensor hidden_pre;  // N x dense_width
  Tensor hidden;      // relu(hidden_pre)
  Tensor logits;      // N
};

struct ForwardResult {
  Tensor probabilities;  // N
  ForwardCache cache;
};

/// Runs an N x C x H x W batch through the network.
ForwardResult forward(const ModelParameters& params, const Tensor& batch);

/// Probabilities only; evaluates in chunks of `chunk` samples.
Tensor predict(const ModelParameters& params, const Tensor& batch, std::size_t chunk = 64);

/// Gradients of the loss with respect to every parameter, given
/// d loss / d probability for each sample. The cache must come from forward()
/// on exactly these parameters, otherwise UsageError.
ModelParameters backward(const ModelParameters& params, const ForwardCache& cache,
                         const Tensor& probability_grad);

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

inline constexpr double kProbabilityClip = 1e-7;

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d probability
};

/// Mean binary cross-entropy with probabilities clipped to
/// [kProbabilityClip, 1 - kProbabilityClip]. The gradient is evaluated at the
/// clipped probability. Targets must be exactly 0 or 1.
LossResult bce_loss(const Tensor& probabilities, const Tensor& targets);

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

enum class OptimizerKind { kSgd, kAdam };

std::string_view optimizer_name(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view text);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  std::uint64_t step = 0;
  ModelParameters first_moment;
  ModelParameters second_moment;
};

/// SGD: p -= lr * g. Adam: bias-corrected moment estimates.
void optimizer_step(ModelParameters& params, const ModelParameters& grads,
                    OptimizerState& state, const OptimizerConfig& config);

}  // namespace seedscan
