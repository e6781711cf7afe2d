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

// Straightforward serial implementations of the tensor kernels. They share no
// code with the optimized path and exist as test oracles and benchmark
// baselines.

#include <vector>

#include "seedscan/kernels.hpp"
#include "seedscan/tensor.hpp"

namespace seedscan::reference {

/// Textbook triple loop.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Direct nested-loop cross-correlation with explicit zero padding.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec);

/// Scans every 2x2 window; returns pooled values and argmax offsets.
struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;
};
PoolResult maxpool2d(const Tensor& input);

}  // namespace seedscan::reference
