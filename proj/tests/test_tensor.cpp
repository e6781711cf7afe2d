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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "seedscan/errors.hpp"
#include "seedscan/kernels.hpp"
#include "seedscan/reference/reference.hpp"
#include "seedscan/tensor.hpp"
#include "test_util.hpp"

namespace seedscan {
namespace {

using testing::random_tensor;
using testing::relative_error;

TEST(Tensor, ShapeAndVolumeAreChecked) {
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_THROW(Tensor({2, 0}), DimensionError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), DimensionError);
  EXPECT_THROW(t.reshaped({4, 2}), DimensionError);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
  t.at({1, 2}) = 5.0;
  EXPECT_EQ(t[5], 5.0);
  EXPECT_THROW(t.at({2, 0}), DimensionError);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.at({i, i}) = 1.0;
  const Tensor b = random_tensor({3, 5}, 1);
  EXPECT_EQ(matmul(eye, b), b);
}

TEST(Matmul, HandCase) {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor b({2, 1}, {5, 6});
  EXPECT_EQ(matmul(a, b), Tensor({2, 1}, {17, 39}));
}

TEST(Matmul, MatchesTripleLoop) {
  const Tensor a = random_tensor({7, 5}, 2), b = random_tensor({5, 4}, 3);
  EXPECT_LT(max_abs_diff(matmul(a, b), reference::matmul(a, b)), 1e-12);
  // Shapes that exercise the full register tile and its ragged edges.
  const Tensor c = random_tensor({37, 29}, 4), d = random_tensor({29, 45}, 5);
  EXPECT_LT(max_abs_diff(matmul(c, d), reference::matmul(c, d)), 1e-12);
}

TEST(Matmul, InnerDimensionMismatchNamesShapes) {
  try {
    matmul(Tensor({2, 3}), Tensor({4, 2}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x2]"), std::string::npos) << msg;
  }
}

TEST(Transpose, RoundTrips) {
  const Tensor a = random_tensor({33, 70}, 6);
  const Tensor t = transpose(a);
  EXPECT_EQ(t.shape(), (Shape{70, 33}));
  EXPECT_EQ(t.at({5, 7}), a.at({7, 5}));
  EXPECT_EQ(transpose(t), a);
}

TEST(ConvSpec, OutputExtentFormula) {
  for (std::size_t in = 1; in <= 9; ++in) {
    for (std::size_t k = 1; k <= 5; ++k) {
      for (std::size_t s = 1; s <= 3; ++s) {
        for (std::size_t p = 0; p <= 2; ++p) {
          if (in + 2 * p < k) {
            EXPECT_THROW(conv_output_extent(in, k, s, p), DimensionError);
          } else {
            EXPECT_EQ(conv_output_extent(in, k, s, p), (in + 2 * p - k) / s + 1);
          }
        }
      }
    }
  }
}

TEST(Conv2d, ZeroInputGivesZeroOutput) {
  ConvSpec spec{2, 3, 3, 3, 1, 1};
  const auto r = conv2d_forward(Tensor({1, 2, 4, 4}), random_tensor(spec.weight_shape(), 7),
                                Tensor({3}), spec);
  for (double v : r.output.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2d, IdentityKernel) {
  ConvSpec spec{1, 1, 1, 1, 1, 0};
  const Tensor input = random_tensor({1, 1, 3, 3}, 8);
  const auto r = conv2d_forward(input, Tensor({1, 1, 1, 1}, 1.0), Tensor({1}), spec);
  EXPECT_EQ(r.output, input);

  Tensor grad({1, 1, 3, 3});
  grad.at({0, 0, 1, 2}) = 1.0;
  const auto g = conv2d_backward(r.cache, grad);
  EXPECT_EQ(g.input, grad);
}

TEST(Conv2d, MatchesDirectLoops) {
  ConvSpec spec{2, 3, 3, 3, 1, 1};
  const Tensor input = random_tensor({1, 2, 5, 5}, 9);
  const Tensor weights = random_tensor(spec.weight_shape(), 10);
  const Tensor bias = random_tensor({3}, 11);
  const Tensor fast = conv2d_forward(input, weights, bias, spec).output;
  EXPECT_LT(max_abs_diff(fast, reference::conv2d(input, weights, bias, spec)), 1e-12);
}

TEST(Conv2d, MatchesDirectLoopsWithStrideAndRectangularKernels) {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    ConvSpec spec{1 + trial % 3, 1 + trial % 4, 1 + trial % 3, 1 + (trial / 3) % 3,
                  1 + trial % 2, trial % 3};
    const Shape in_shape{1 + trial % 2, spec.in_channels, 6 + trial % 3, 5 + trial % 4};
    const Tensor input = random_tensor(in_shape, 100 + trial);
    const Tensor weights = random_tensor(spec.weight_shape(), 200 + trial);
    const Tensor bias = random_tensor({spec.out_channels}, 300 + trial);
    EXPECT_LT(max_abs_diff(conv2d_forward(input, weights, bias, spec).output,
                           reference::conv2d(input, weights, bias, spec)),
              1e-12)
        << "trial " << trial;
  }
}

TEST(Conv2d, ChannelMismatchIsDimensionError) {
  ConvSpec spec{2, 3, 3, 3, 1, 1};
  EXPECT_THROW(conv2d_forward(Tensor({1, 3, 4, 4}), Tensor(spec.weight_shape()), Tensor({3}),
                              spec),
               DimensionError);
  EXPECT_THROW(conv2d_forward(Tensor({1, 2, 4, 4}), Tensor(spec.weight_shape()), Tensor({2}),
                              spec),
               DimensionError);
}

TEST(Conv2d, ZeroUpstreamGradientGivesZeroGradients) {
  ConvSpec spec{2, 3, 3, 3, 1, 1};
  const auto r = conv2d_forward(random_tensor({2, 2, 4, 4}, 12),
                                random_tensor(spec.weight_shape(), 13), Tensor({3}), spec);
  const auto g = conv2d_backward(r.cache, Tensor::zeros_like(r.output));
  for (const Tensor* t : {&g.input, &g.weights, &g.bias}) {
    for (double v : t->data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Conv2d, BackwardRejectsWrongGradientShape) {
  ConvSpec spec{1, 1, 3, 3, 1, 1};
  const auto r = conv2d_forward(Tensor({1, 1, 4, 4}), Tensor(spec.weight_shape()), Tensor({1}),
                                spec);
  EXPECT_THROW(conv2d_backward(r.cache, Tensor({1, 1, 3, 4})), DimensionError);
}

// L = sum(conv(x, w, b) * g); every partial derivative is compared with a
// central difference.
TEST(Conv2d, GradientsMatchFiniteDifferences) {
  ConvSpec spec{2, 3, 3, 3, 2, 1};
  Tensor input = random_tensor({2, 2, 5, 6}, 14);
  Tensor weights = random_tensor(spec.weight_shape(), 15);
  Tensor bias = random_tensor({3}, 16);
  const auto r = conv2d_forward(input, weights, bias, spec);
  const Tensor g = random_tensor(r.output.shape(), 17);
  const auto grads = conv2d_backward(r.cache, g);

  auto loss = [&] {
    const Tensor out = reference::conv2d(input, weights, bias, spec);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * g[i];
    return s;
  };
  const double h = 1e-5;
  auto check = [&](Tensor& param, const Tensor& analytic, const char* name) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double saved = param[i];
      param[i] = saved + h;
      const double up = loss();
      param[i] = saved - h;
      const double down = loss();
      param[i] = saved;
      EXPECT_LT(relative_error(analytic[i], (up - down) / (2 * h)), 1e-6) << name << "[" << i
                                                                           << "]";
    }
  };
  check(input, grads.input, "input");
  check(weights, grads.weights, "weights");
  check(bias, grads.bias, "bias");
}

TEST(Conv2d, InputGradientCanBeSkipped) {
  ConvSpec spec{3, 4, 3, 3, 1, 1};
  const auto r = conv2d_forward(random_tensor({2, 3, 6, 6}, 18),
                                random_tensor(spec.weight_shape(), 19), Tensor({4}), spec);
  const Tensor g = random_tensor(r.output.shape(), 20);
  const auto full = conv2d_backward(r.cache, g);
  const auto partial = conv2d_backward(r.cache, g, false);
  EXPECT_TRUE(partial.input.empty());
  EXPECT_EQ(partial.weights, full.weights);
  EXPECT_EQ(partial.bias, full.bias);
}

TEST(Im2col, Col2imIsItsAdjoint) {
  // <im2col(x), y> == <x, col2im(y)> for random x, y.
  ConvSpec spec{2, 1, 3, 2, 2, 1};
  const std::size_t h = 5, w = 6;
  const std::size_t cols = spec.output_height(h) * spec.output_width(w);
  const Tensor x = random_tensor({2, h, w}, 21);
  const Tensor y = random_tensor({spec.patch_size(), cols}, 22);
  Tensor unfolded({spec.patch_size(), cols});
  im2col(x.raw(), h, w, spec, unfolded.raw());
  Tensor folded({2, h, w});
  col2im(y.raw(), h, w, spec, folded.raw());
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += unfolded[i] * y[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * folded[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(MaxPool, HandCaseAndRouting) {
  const Tensor input({1, 1, 2, 2}, {1, 2, 3, 4});
  const auto r = maxpool2d_forward(input);
  EXPECT_EQ(r.output, Tensor({1, 1, 1, 1}, 4.0));
  const Tensor back = maxpool2d_backward(r.cache, Tensor({1, 1, 1, 1}, 1.0));
  EXPECT_EQ(back, Tensor({1, 1, 2, 2}, {0, 0, 0, 1}));
}

TEST(MaxPool, TiesGoToFirstRowMajorElement) {
  const auto r = maxpool2d_forward(Tensor({1, 1, 2, 2}, 7.0));
  const Tensor back = maxpool2d_backward(r.cache, Tensor({1, 1, 1, 1}, 1.0));
  EXPECT_EQ(back, Tensor({1, 1, 2, 2}, {1, 0, 0, 0}));
}

TEST(MaxPool, MatchesBruteForceScan) {
  const Tensor input = random_tensor({1, 3, 8, 8}, 23);
  const auto fast = maxpool2d_forward(input);
  const auto slow = reference::maxpool2d(input);
  EXPECT_EQ(fast.output, slow.output);
  EXPECT_EQ(fast.cache.argmax, slow.argmax);
}

TEST(MaxPool, OddDimensionsAreRejected) {
  EXPECT_THROW(maxpool2d_forward(Tensor({1, 1, 3, 4})), DimensionError);
  EXPECT_THROW(maxpool2d_forward(Tensor({1, 1, 4, 5})), DimensionError);
}

TEST(Activations, ReluValues) {
  const Tensor r = relu(Tensor({3}, {-3.0, 0.0, 3.0}));
  EXPECT_EQ(r, Tensor({3}, {0.0, 0.0, 3.0}));
  const Tensor g = relu_backward(Tensor({3}, {-3.0, 0.0, 3.0}), Tensor({3}, 1.0));
  EXPECT_EQ(g, Tensor({3}, {0.0, 0.0, 1.0}));
}

TEST(Activations, SigmoidIsStableAndStrictlyInsideUnitInterval) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  for (double x : {-1e6, -745.0, -40.0, -1.0, 1.0, 40.0, 745.0, 1e6}) {
    const double s = sigmoid(x);
    EXPECT_GT(s, 0.0) << x;
    EXPECT_LT(s, 1.0) << x;
    EXPECT_TRUE(std::isfinite(sigmoid_derivative(x))) << x;
  }
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

TEST(Activations, SigmoidDerivativeMatchesFiniteDifference) {
  const double x = 1.7, h = 1e-5;
  const double numeric = (sigmoid(x + h) - sigmoid(x - h)) / (2 * h);
  EXPECT_LT(relative_error(sigmoid_derivative(x), numeric), 1e-8);

  const Tensor in({4}, {-2.0, -0.3, 0.4, 5.0});
  const Tensor up = random_tensor({4}, 24);
  const Tensor g = sigmoid_backward(in, up);
  for (std::size_t i = 0; i < 4; ++i) {
    const double fd = (sigmoid(in[i] + h) - sigmoid(in[i] - h)) / (2 * h);
    EXPECT_LT(relative_error(g[i], up[i] * fd), 1e-8);
  }
}

TEST(Activations, OutputsStayFinite) {
  const Tensor x = random_tensor({64}, 25, -50.0, 50.0);
  EXPECT_TRUE(sigmoid(x).all_finite());
  EXPECT_TRUE(relu(x).all_finite());
}

}  // namespace
}  // namespace seedscan
