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

#include <cstddef>
#include <vector>

#include "seedscan/tensor.hpp"

namespace seedscan {

// ---------------------------------------------------------------------------
// Dense products
// ---------------------------------------------------------------------------

/// C[m x n] (+)= A[m x k] * B[k x n], all row-major and contiguous.
///
/// Single-threaded register-tiled kernel. Each output element is accumulated
/// over k in ascending order, so the result does not depend on tiling or on
/// how callers split work across threads.
void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate);

/// Row-major transpose of a rows x cols block into cols x rows.
void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst);

/// Matrix product of rank-2 tensors; parallel over column panels.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& matrix);

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_height = 3;
  std::size_t kernel_width = 3;
  std::size_t stride = 1;
  std::size_t padding = 0;

  /// floor((in + 2 * padding - kernel) / stride) + 1; DimensionError if < 1.
  std::size_t output_height(std::size_t input_height) const;
  std::size_t output_width(std::size_t input_width) const;
  std::size_t patch_size() const { return in_channels * kernel_height * kernel_width; }
  Shape weight_shape() const {
    return {out_channels, in_channels, kernel_height, kernel_width};
  }
};

std::size_t conv_output_extent(std::size_t input, std::size_t kernel,
                               std::size_t stride, std::size_t padding);

/// Unfolds one C x H x W image into a (C*kh*kw) x (H'*W') patch matrix.
void im2col(const double* image, std::size_t height, std::size_t width,
            const ConvSpec& spec, double* columns);

/// Adjoint of im2col: scatters a patch matrix back onto a C x H x W image,
/// adding into `image`.
void col2im(const double* columns, std::size_t height, std::size_t width,
            const ConvSpec& spec, double* image);

struct Conv2dCache {
  ConvSpec spec;
  Tensor input;
  Tensor weights;
};

struct Conv2dResult {
  Tensor output;
  Conv2dCache cache;
};

struct Conv2dGradients {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

/// Cross-correlation (no kernel flip) of N x C x H x W input with
/// F x C x kh x kw weights plus per-filter bias, computed per sample via
/// im2col + gemm. Samples run in parallel.
Conv2dResult conv2d_forward(const Tensor& input, const Tensor& weights,
                            const Tensor& bias, const ConvSpec& spec);

/// Exact gradients of conv2d_forward. Per-sample weight gradients are summed
/// in batch order, so the result is identical for any thread count. With
/// `need_input_grad` false the input gradient is left empty.
Conv2dGradients conv2d_backward(const Conv2dCache& cache, const Tensor& grad_output,
                                bool need_input_grad = true);

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

struct MaxPoolCache {
  Shape input_shape;
  std::vector<std::size_t> argmax;  // flat input offset per output element
};

struct MaxPoolResult {
  Tensor output;
  MaxPoolCache cache;
};

/// 2x2 window, stride 2. Ties go to the first element in row-major order.
MaxPoolResult maxpool2d_forward(const Tensor& input);
Tensor maxpool2d_backward(const MaxPoolCache& cache, const Tensor& grad_output);

// ---------------------------------------------------------------------------
// Elementwise activations
// ---------------------------------------------------------------------------

Tensor relu(const Tensor& x);
/// Passes grad where the forward input was strictly positive.
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);

/// Logistic function; evaluates exp only on a non-positive argument.
double sigmoid(double x) noexcept;
/// d sigmoid / dx, stable for large |x|.
double sigmoid_derivative(double x) noexcept;

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& input, const Tensor& grad_output);

}  // namespace seedscan
