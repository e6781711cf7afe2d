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

#include "seedscan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "seedscan/errors.hpp"

namespace seedscan {

namespace {

constexpr std::size_t kLanes = 8;
constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 2 * kLanes;

// Unaligned 8-wide double vector; lowered to whatever SIMD the target has.
typedef double Lanes __attribute__((vector_size(kLanes * sizeof(double)), aligned(8),
                                    may_alias));

inline Lanes load(const double* p) { return *reinterpret_cast<const Lanes*>(p); }
inline void store(double* p, Lanes v) { *reinterpret_cast<Lanes*>(p) = v; }

// Accumulates a Rows x 16 block of C over the full k range with the
// accumulator held in vector registers.
template <std::size_t Rows>
inline void gemm_tile(std::size_t n, std::size_t k, const double* a,
                      const double* b, double* c) {
  Lanes lo[Rows], hi[Rows];
  for (std::size_t r = 0; r < Rows; ++r) {
    lo[r] = load(c + r * n);
    hi[r] = load(c + r * n + kLanes);
  }
  for (std::size_t p = 0; p < k; ++p) {
    const Lanes b_lo = load(b + p * n);
    const Lanes b_hi = load(b + p * n + kLanes);
    for (std::size_t r = 0; r < Rows; ++r) {
      const double av = a[r * k + p];
      lo[r] += av * b_lo;
      hi[r] += av * b_hi;
    }
  }
  for (std::size_t r = 0; r < Rows; ++r) {
    store(c + r * n, lo[r]);
    store(c + r * n + kLanes, hi[r]);
  }
}

// Ragged edge: same summation order as the tile path, runtime extents.
inline void gemm_edge(std::size_t rows, std::size_t cols, std::size_t n,
                      std::size_t k, const double* a, const double* b, double* c) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = c[r * n + j];
      for (std::size_t p = 0; p < k; ++p) acc += a[r * k + p] * b[p * n + j];
      c[r * n + j] = acc;
    }
  }
}

template <std::size_t Rows>
inline void gemm_row_panel(std::size_t n, std::size_t k, const double* a,
                           const double* b, double* c) {
  std::size_t j = 0;
  for (; j + kTileCols <= n; j += kTileCols) {
    gemm_tile<Rows>(n, k, a, b + j, c + j);
  }
  if (j < n) gemm_edge(Rows, n - j, n, k, a, b + j, c + j);
}

void check_conv_input(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      const ConvSpec& spec) {
  require_rank(input, 4, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  require_rank(bias, 1, "conv2d bias");
  if (spec.stride == 0) throw DimensionError("conv2d stride must be >= 1");
  if (input.dim(1) != spec.in_channels) {
    throw DimensionError("conv2d input " + shape_to_string(input.shape()) + " has " +
                         std::to_string(input.dim(1)) + " channels, spec expects " +
                         std::to_string(spec.in_channels));
  }
  if (weights.shape() != spec.weight_shape()) {
    throw DimensionError("conv2d weights " + shape_to_string(weights.shape()) +
                         " do not match spec " + shape_to_string(spec.weight_shape()));
  }
  if (bias.dim(0) != spec.out_channels) {
    throw DimensionError("conv2d bias " + shape_to_string(bias.shape()) +
                         " does not match " + std::to_string(spec.out_channels) +
                         " filters");
  }
  spec.output_height(input.dim(2));
  spec.output_width(input.dim(3));
}

}  // namespace

void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  if (k == 0) return;
  std::size_t i = 0;
  for (; i + kTileRows <= m; i += kTileRows) {
    gemm_row_panel<kTileRows>(n, k, a + i * k, b, c + i * n);
  }
  for (; i < m; ++i) gemm_row_panel<1>(n, k, a + i * k, b, c + i * n);
}

void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    const std::size_t r1 = std::min(rows, r0 + kBlock);
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      const std::size_t c1 = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
      }
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul lhs");
  require_rank(b, 2, "matmul rhs");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul inner dimensions disagree: " + shape_to_string(a.shape()) +
                         " x " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  constexpr std::size_t kChunk = 4 * kTileRows;
  const auto chunks = static_cast<long>((m + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(static)
  for (long chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t row = static_cast<std::size_t>(chunk) * kChunk;
    const std::size_t rows = std::min(kChunk, m - row);
    gemm(rows, n, k, a.raw() + row * k, b.raw(), c.raw() + row * n, false);
  }
  return c;
}

Tensor transpose(const Tensor& matrix) {
  require_rank(matrix, 2, "transpose");
  Tensor out({matrix.dim(1), matrix.dim(0)});
  transpose(matrix.dim(0), matrix.dim(1), matrix.raw(), out.raw());
  return out;
}

std::size_t conv_output_extent(std::size_t input, std::size_t kernel,
                               std::size_t stride, std::size_t padding) {
  if (stride == 0) throw DimensionError("stride must be >= 1");
  const std::size_t padded = input + 2 * padding;
  if (kernel == 0 || padded < kernel) {
    throw DimensionError("kernel " + std::to_string(kernel) + " does not fit input " +
                         std::to_string(input) + " with padding " +
                         std::to_string(padding));
  }
  return (padded - kernel) / stride + 1;
}

std::size_t ConvSpec::output_height(std::size_t input_height) const {
  return conv_output_extent(input_height, kernel_height, stride, padding);
}

std::size_t ConvSpec::output_width(std::size_t input_width) const {
  return conv_output_extent(input_width, kernel_width, stride, padding);
}

void im2col(const double* image, std::size_t height, std::size_t width,
            const ConvSpec& spec, double* columns) {
  const std::size_t out_h = spec.output_height(height);
  const std::size_t out_w = spec.output_width(width);
  const auto pad = static_cast<long>(spec.padding);
  const auto stride = static_cast<long>(spec.stride);
  double* dst = columns;
  for (std::size_t c = 0; c < spec.in_channels; ++c) {
    const double* plane = image + c * height * width;
    for (std::size_t ky = 0; ky < spec.kernel_height; ++ky) {
      for (std::size_t kx = 0; kx < spec.kernel_width; ++kx) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const long iy = static_cast<long>(oy) * stride - pad + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(height)) {
            std::fill(dst, dst + out_w, 0.0);
            dst += out_w;
            continue;
          }
          const double* src_row = plane + static_cast<std::size_t>(iy) * width;
          for (std::size_t ox = 0; ox < out_w; ++ox) {
            const long ix = static_cast<long>(ox) * stride - pad + static_cast<long>(kx);
            *dst++ = (ix < 0 || ix >= static_cast<long>(width))
                         ? 0.0
                         : src_row[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

void col2im(const double* columns, std::size_t height, std::size_t width,
            const ConvSpec& spec, double* image) {
  const std::size_t out_h = spec.output_height(height);
  const std::size_t out_w = spec.output_width(width);
  const auto pad = static_cast<long>(spec.padding);
  const auto stride = static_cast<long>(spec.stride);
  const double* src = columns;
  for (std::size_t c = 0; c < spec.in_channels; ++c) {
    double* plane = image + c * height * width;
    for (std::size_t ky = 0; ky < spec.kernel_height; ++ky) {
      for (std::size_t kx = 0; kx < spec.kernel_width; ++kx) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
          const long iy = static_cast<long>(oy) * stride - pad + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(height)) {
            src += out_w;
            continue;
          }
          double* dst_row = plane + static_cast<std::size_t>(iy) * width;
          for (std::size_t ox = 0; ox < out_w; ++ox, ++src) {
            const long ix = static_cast<long>(ox) * stride - pad + static_cast<long>(kx);
            if (ix >= 0 && ix < static_cast<long>(width)) {
              dst_row[static_cast<std::size_t>(ix)] += *src;
            }
          }
        }
      }
    }
  }
}

Conv2dResult conv2d_forward(const Tensor& input, const Tensor& weights,
                            const Tensor& bias, const ConvSpec& spec) {
  check_conv_input(input, weights, bias, spec);
  const std::size_t batch = input.dim(0);
  const std::size_t height = input.dim(2), width = input.dim(3);
  const std::size_t out_h = spec.output_height(height);
  const std::size_t out_w = spec.output_width(width);
  const std::size_t pixels = out_h * out_w;
  const std::size_t patch = spec.patch_size();
  const std::size_t filters = spec.out_channels;
  const std::size_t in_stride = spec.in_channels * height * width;

  Tensor output({batch, filters, out_h, out_w});
#pragma omp parallel
  {
    std::vector<double> columns(patch * pixels);
#pragma omp for schedule(static)
    for (long s = 0; s < static_cast<long>(batch); ++s) {
      const auto n = static_cast<std::size_t>(s);
      im2col(input.raw() + n * in_stride, height, width, spec, columns.data());
      double* out = output.raw() + n * filters * pixels;
      gemm(filters, pixels, patch, weights.raw(), columns.data(), out, false);
      for (std::size_t f = 0; f < filters; ++f) {
        const double b = bias[f];
        for (std::size_t p = 0; p < pixels; ++p) out[f * pixels + p] += b;
      }
    }
  }
  return {std::move(output), Conv2dCache{spec, input, weights}};
}

Conv2dGradients conv2d_backward(const Conv2dCache& cache, const Tensor& grad_output,
                                bool need_input_grad) {
  const ConvSpec& spec = cache.spec;
  const Tensor& input = cache.input;
  if (input.empty()) throw UsageError("conv2d_backward called with an empty cache");
  const std::size_t batch = input.dim(0);
  const std::size_t height = input.dim(2), width = input.dim(3);
  const std::size_t out_h = spec.output_height(height);
  const std::size_t out_w = spec.output_width(width);
  const Shape expected{batch, spec.out_channels, out_h, out_w};
  if (grad_output.shape() != expected) {
    throw DimensionError("conv2d grad_output " + shape_to_string(grad_output.shape()) +
                         " does not match forward output " + shape_to_string(expected));
  }
  const std::size_t pixels = out_h * out_w;
  const std::size_t patch = spec.patch_size();
  const std::size_t filters = spec.out_channels;
  const std::size_t in_stride = spec.in_channels * height * width;

  Conv2dGradients grads{need_input_grad ? Tensor(input.shape()) : Tensor(),
                        Tensor(cache.weights.shape()), Tensor({filters})};

  std::vector<double> weights_t(patch * filters);
  transpose(filters, patch, cache.weights.raw(), weights_t.data());

  // Transposed (patch x filters) weight gradient per sample; reduced below in
  // batch order.
  std::vector<double> per_sample(batch * patch * filters);
#pragma omp parallel
  {
    std::vector<double> columns(patch * pixels);
    std::vector<double> dout_t(pixels * filters);
#pragma omp for schedule(static)
    for (long s = 0; s < static_cast<long>(batch); ++s) {
      const auto n = static_cast<std::size_t>(s);
      const double* dout = grad_output.raw() + n * filters * pixels;

      im2col(input.raw() + n * in_stride, height, width, spec, columns.data());
      transpose(filters, pixels, dout, dout_t.data());
      gemm(patch, filters, pixels, columns.data(), dout_t.data(),
           per_sample.data() + n * patch * filters, false);

      if (need_input_grad) {
        gemm(patch, pixels, filters, weights_t.data(), dout, columns.data(), false);
        col2im(columns.data(), height, width, spec, grads.input.raw() + n * in_stride);
      }
    }
  }

  std::vector<double> weights_grad_t(patch * filters, 0.0);
  for (std::size_t n = 0; n < batch; ++n) {
    const double* part = per_sample.data() + n * patch * filters;
    for (std::size_t i = 0; i < patch * filters; ++i) weights_grad_t[i] += part[i];
  }
  transpose(patch, filters, weights_grad_t.data(), grads.weights.raw());

  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t f = 0; f < filters; ++f) {
      const double* dout = grad_output.raw() + (n * filters + f) * pixels;
      double sum = 0.0;
      for (std::size_t p = 0; p < pixels; ++p) sum += dout[p];
      grads.bias[f] += sum;
    }
  }
  return grads;
}

MaxPoolResult maxpool2d_forward(const Tensor& input) {
  require_rank(input, 4, "maxpool2d input");
  const std::size_t height = input.dim(2), width = input.dim(3);
  if (height % 2 != 0 || width % 2 != 0) {
    throw DimensionError("maxpool2d needs even spatial dims, got " +
                         shape_to_string(input.shape()));
  }
  const std::size_t planes = input.dim(0) * input.dim(1);
  const std::size_t out_h = height / 2, out_w = width / 2;
  Tensor output({input.dim(0), input.dim(1), out_h, out_w});
  MaxPoolCache cache{input.shape(), std::vector<std::size_t>(output.size())};

#pragma omp parallel for schedule(static)
  for (long pl = 0; pl < static_cast<long>(planes); ++pl) {
    const auto plane = static_cast<std::size_t>(pl);
    const std::size_t in_base = plane * height * width;
    const std::size_t out_base = plane * out_h * out_w;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        std::size_t best = in_base + (2 * oy) * width + 2 * ox;
        double best_value = input[best];
        const std::size_t candidates[3] = {best + 1, best + width, best + width + 1};
        for (std::size_t idx : candidates) {
          if (input[idx] > best_value) {
            best_value = input[idx];
            best = idx;
          }
        }
        output[out_base + oy * out_w + ox] = best_value;
        cache.argmax[out_base + oy * out_w + ox] = best;
      }
    }
  }
  return {std::move(output), std::move(cache)};
}

Tensor maxpool2d_backward(const MaxPoolCache& cache, const Tensor& grad_output) {
  if (cache.argmax.size() != grad_output.size()) {
    throw DimensionError("maxpool2d grad_output " + shape_to_string(grad_output.shape()) +
                         " does not match cached forward of input " +
                         shape_to_string(cache.input_shape));
  }
  Tensor grad_input(cache.input_shape);
  // Windows do not overlap, so each input cell receives at most one write.
  for (std::size_t i = 0; i < grad_output.size(); ++i) {
    grad_input[cache.argmax[i]] += grad_output[i];
  }
  return grad_input;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
  require_same_shape(input, grad_output, "relu_backward");
  Tensor out = grad_output;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(input[i] > 0.0)) out[i] = 0.0;
  }
  return out;
}

double sigmoid(double x) noexcept {
  // Clamp keeps the result strictly inside (0, 1) once exp saturates.
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  constexpr double kHigh = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kLow, kHigh);
}

double sigmoid_derivative(double x) noexcept {
  const double e = std::exp(-std::abs(x));
  const double denom = 1.0 + e;
  return e / (denom * denom);
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = sigmoid(v);
  return out;
}

Tensor sigmoid_backward(const Tensor& input, const Tensor& grad_output) {
  require_same_shape(input, grad_output, "sigmoid_backward");
  Tensor out = grad_output;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sigmoid_derivative(input[i]);
  return out;
}

}  // namespace seedscan
