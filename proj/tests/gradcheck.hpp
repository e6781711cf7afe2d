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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "seedscan/model.hpp"

namespace seedscan::testing {

/// Mean BCE of the model on (batch, targets).
inline double model_loss(const ModelParameters& params, const Tensor& batch,
                         const Tensor& targets) {
  return bce_loss(forward(params, batch).probabilities, targets).loss;
}

/// Per-tensor relative error ||analytic - numeric|| / max(||analytic||,
/// ||numeric||) between backward() and central differences of model_loss.
/// `stride` > 1 checks every stride-th element only.
inline std::map<std::string, double> gradient_check(ModelParameters params,
                                                    const Tensor& batch,
                                                    const Tensor& targets,
                                                    std::size_t stride = 1,
                                                    double h = 1e-5) {
  const ForwardResult fr = forward(params, batch);
  const LossResult loss = bce_loss(fr.probabilities, targets);
  const ModelParameters analytic = backward(params, fr.cache, loss.grad);

  std::map<std::string, double> errors;
  for (std::size_t t = 0; t < params.tensor_count(); ++t) {
    Tensor& value = params.entries()[t].value;
    const Tensor& grad = analytic.entries()[t].value;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < value.size(); i += stride) {
      const double saved = value[i];
      value[i] = saved + h;
      const double up = model_loss(params, batch, targets);
      value[i] = saved - h;
      const double down = model_loss(params, batch, targets);
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (grad[i] - numeric) * (grad[i] - numeric);
      a2 += grad[i] * grad[i];
      n2 += numeric * numeric;
    }
    const double scale = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
    errors[params.entries()[t].name] = std::sqrt(diff2) / scale;
  }
  return errors;
}

}  // namespace seedscan::testing
