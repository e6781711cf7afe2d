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

#include "seedscan/reference/reference.hpp"

#include "seedscan/errors.hpp"

namespace seedscan::reference {

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("reference matmul: " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t p = 0; p < k; ++p) sum += a.at({i, p}) * b.at({p, j});
      c.at({i, j}) = sum;
    }
  }
  return c;
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
  const std::size_t batch = input.dim(0), channels = input.dim(1);
  const std::size_t height = input.dim(2), width = input.dim(3);
  const std::size_t out_h = spec.output_height(height);
  const std::size_t out_w = spec.output_width(width);
  const long pad = static_cast<long>(spec.padding);
  Tensor out({batch, spec.out_channels, out_h, out_w});
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t f = 0; f < spec.out_channels; ++f) {
      for (std::size_t oy = 0; oy < out_h; ++oy) {
        for (std::size_t ox = 0; ox < out_w; ++ox) {
          double sum = 0.0;
          for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t ky = 0; ky < spec.kernel_height; ++ky) {
              for (std::size_t kx = 0; kx < spec.kernel_width; ++kx) {
                const long iy = static_cast<long>(oy * spec.stride + ky) - pad;
                const long ix = static_cast<long>(ox * spec.stride + kx) - pad;
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(height) ||
                    ix >= static_cast<long>(width)) {
                  continue;
                }
                sum += input.at({n, c, static_cast<std::size_t>(iy),
                                 static_cast<std::size_t>(ix)}) *
                       weights.at({f, c, ky, kx});
              }
            }
          }
          out.at({n, f, oy, ox}) = sum + bias.at({f});
        }
      }
    }
  }
  return out;
}

PoolResult maxpool2d(const Tensor& input) {
  const std::size_t batch = input.dim(0), channels = input.dim(1);
  const std::size_t height = input.dim(2), width = input.dim(3);
  PoolResult result{Tensor({batch, channels, height / 2, width / 2}), {}};
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t oy = 0; oy < height / 2; ++oy) {
        for (std::size_t ox = 0; ox < width / 2; ++ox) {
          bool first = true;
          double best = 0.0;
          std::size_t best_offset = 0;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t y = 2 * oy + dy, x = 2 * ox + dx;
              const double v = input.at({n, c, y, x});
              if (first || v > best) {
                first = false;
                best = v;
                best_offset = ((n * channels + c) * height + y) * width + x;
              }
            }
          }
          result.output.at({n, c, oy, ox}) = best;
          result.argmax.push_back(best_offset);
        }
      }
    }
  }
  return result;
}

}  // namespace seedscan::reference
