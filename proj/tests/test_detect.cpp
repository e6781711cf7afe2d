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

#include <algorithm>
#include <cmath>

#include "seedscan/data.hpp"
#include "seedscan/detect.hpp"
#include "seedscan/errors.hpp"
#include "seedscan/synth.hpp"

namespace seedscan {
namespace {

Mask empty_mask(std::size_t w, std::size_t h) {
  return Mask{w, h, std::vector<std::uint8_t>(w * h, 0)};
}

void fill_square(Mask& m, std::size_t x0, std::size_t y0, std::size_t side) {
  for (std::size_t y = y0; y < y0 + side; ++y) {
    for (std::size_t x = x0; x < x0 + side; ++x) m.bits[y * m.width + x] = 1;
  }
}

// Brute-force Otsu: between-class variance evaluated directly for every cut.
int otsu_oracle(const std::vector<std::size_t>& hist) {
  double best = -1.0;
  int best_t = -1;
  for (int t = 0; t < 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int i = 0; i < 256; ++i) {
      (i <= t ? n0 : n1) += static_cast<double>(hist[i]);
      (i <= t ? s0 : s1) += static_cast<double>(hist[i]) * i;
    }
    if (n0 == 0 || n1 == 0) continue;
    const double d = s0 / n0 - s1 / n1;
    const double between = n0 * n1 * d * d;
    if (between > best * (1 + 1e-12) + 1e-300) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

TEST(Otsu, MatchesBruteForceOnBimodalHistograms) {
  std::vector<std::size_t> hist(256, 0);
  hist[30] = 1000;
  hist[200] = 300;
  const int t = otsu_threshold(hist);
  EXPECT_GE(t, 30);
  EXPECT_LT(t, 200);
  for (std::size_t seed = 1; seed < 20; ++seed) {
    std::vector<std::size_t> h(256, 0);
    for (std::size_t i = 0; i < 256; ++i) h[i] = (i * 7919 * seed + seed * seed) % 13;
    EXPECT_EQ(otsu_threshold(h), otsu_oracle(h)) << "seed " << seed;
  }
}

TEST(Otsu, SingleBinIsDegenerate) {
  std::vector<std::size_t> hist(256, 0);
  hist[77] = 500;
  EXPECT_EQ(otsu_threshold(hist), -1);
}

TEST(Segment, UniformImageGivesEmptyMask) {
  EXPECT_EQ(segment_foreground(Image(40, 30, {120, 120, 120})).count(), 0u);
  EXPECT_THROW(segment_foreground(Image()), ValidationError);
}

TEST(Segment, FillsDarkHolesInsideBrightObjects) {
  Image img(40, 40, {20, 20, 20});
  for (std::size_t y = 10; y < 30; ++y) {
    for (std::size_t x = 10; x < 30; ++x) img.set(x, y, {220, 200, 80});
  }
  for (std::size_t y = 17; y < 22; ++y) {
    for (std::size_t x = 17; x < 22; ++x) img.set(x, y, {10, 10, 10});
  }
  EXPECT_EQ(segment_foreground(img).count(), 400u);
}

TEST(Components, EmptyMaskHasNoBoxes) {
  EXPECT_TRUE(connected_components(empty_mask(16, 16)).empty());
}

TEST(Components, TwoDisjointSquares) {
  Mask m = empty_mask(50, 40);
  fill_square(m, 30, 5, 10);
  fill_square(m, 2, 20, 10);
  const auto boxes = connected_components(m);
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[0], (BoundingBox{30, 5, 10, 10}));
  EXPECT_EQ(boxes[1], (BoundingBox{2, 20, 10, 10}));
}

TEST(Components, DiagonalPixelsConnectAndSmallOnesDrop) {
  Mask m = empty_mask(30, 30);
  fill_square(m, 0, 0, 10);
  fill_square(m, 10, 10, 10);  // touches the first only at a corner
  fill_square(m, 25, 0, 3);    // 9 px speckle
  const auto boxes = connected_components(m);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0], (BoundingBox{0, 0, 20, 20}));
  EXPECT_EQ(connected_components(m, 9).size(), 2u);
}

// For each ground-truth box, the best IoU among detections.
std::vector<double> best_ious(const std::vector<SceneKernel>& truth,
                              const std::vector<BoundingBox>& found) {
  std::vector<double> out;
  for (const SceneKernel& k : truth) {
    double best = 0.0;
    for (const BoundingBox& b : found) best = std::max(best, iou(k.box, b));
    out.push_back(best);
  }
  return out;
}

class SceneDetection : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    scene_ = new Scene(generate_scene(scene_spec_with_counts(14, 11, 2024), 2024));
  }
  static void TearDownTestSuite() {
    delete scene_;
    scene_ = nullptr;
  }
  static Scene* scene_;
};
Scene* SceneDetection::scene_ = nullptr;

TEST_F(SceneDetection, MaskAreaMatchesPaintedKernels) {
  const Mask mask = segment_foreground(scene_->image);
  const auto painted = static_cast<double>(
      std::count(scene_->kernel_mask.begin(), scene_->kernel_mask.end(), std::uint8_t{1}));
  EXPECT_NEAR(static_cast<double>(mask.count()), painted, 0.05 * painted);
}

TEST_F(SceneDetection, EveryKernelFoundWithHighOverlap) {
  const auto boxes = connected_components(segment_foreground(scene_->image));
  ASSERT_EQ(boxes.size(), 25u);
  for (double v : best_ious(scene_->kernels, boxes)) EXPECT_GE(v, 0.8);
  for (std::size_t i = 1; i < boxes.size(); ++i) {
    EXPECT_TRUE(boxes[i - 1].y < boxes[i].y ||
                (boxes[i - 1].y == boxes[i].y && boxes[i - 1].x <= boxes[i].x));
  }
}

TEST_F(SceneDetection, InvertedImageKeepsComponentCount) {
  Image inverted = scene_->image;
  for (std::uint8_t& v : inverted.pixels) v = static_cast<std::uint8_t>(255 - v);
  const auto boxes = connected_components(segment_foreground(inverted));
  ASSERT_EQ(boxes.size(), 25u);
  for (double v : best_ious(scene_->kernels, boxes)) EXPECT_GE(v, 0.8);
}

TEST_F(SceneDetection, TranslationShiftsBoxesExactly) {
  const Image& src = scene_->image;
  const std::size_t pad = 12, dx = 7, dy = 4;
  auto place = [&](std::size_t ox, std::size_t oy) {
    Image out(src.width + pad, src.height + pad, {30, 30, 30});
    for (std::size_t y = 0; y < src.height; ++y) {
      for (std::size_t x = 0; x < src.width; ++x) out.set(x + ox, y + oy, src.get(x, y));
    }
    return out;
  };
  const auto a = connected_components(segment_foreground(place(0, 0)));
  const auto b = connected_components(segment_foreground(place(dx, dy)));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(b[i], (BoundingBox{a[i].x + dx, a[i].y + dy, a[i].width, a[i].height}));
  }
}

TEST_F(SceneDetection, InspectionDecomposesIntoStandaloneForwards) {
  ModelConfig config;
  config.input_height = config.input_width = 32;
  const ModelParameters params = build_model(config);
  InspectConfig ic;
  ic.model = config;
  const Inspection result = inspect_scene(scene_->image, params, ic);
  ASSERT_EQ(result.report.rows.size(), 25u);
  ASSERT_EQ(result.crops.size(), 25u);
  for (std::size_t i = 0; i < result.crops.size(); ++i) {
    const ReportRow& row = result.report.rows[i];
    EXPECT_EQ(row.identifier, "Z-" + std::to_string(i + 1));
    const Tensor one = preprocess(result.crops[i], 32, 32).reshaped({1, 3, 32, 32});
    const double p = forward(params, one).probabilities[0];
    EXPECT_NEAR(row.probability, p, 1e-12);
    EXPECT_EQ(row.predict, classify(row.probability));
    EXPECT_GE(row.calculation(), 0.0);
    EXPECT_LE(row.calculation(), 1.0);
    EXPECT_EQ(result.crops[i].width, result.crops[i].height);
  }
  EXPECT_EQ(result.report.normal_count() + result.report.abnormal_count(), 25u);
  EXPECT_NE(result.annotated, scene_->image);
}

TEST(Inspect, BlankImageHasNoRows) {
  ModelConfig config;
  config.input_height = config.input_width = 16;
  InspectConfig ic;
  ic.model = config;
  const Image blank(200, 100, {30, 30, 30});
  const Inspection result = inspect_scene(blank, build_model(config), ic);
  EXPECT_TRUE(result.report.rows.empty());
  EXPECT_EQ(result.annotated, blank);
  EXPECT_EQ(result.report.normal_count(), 0u);
}

TEST(Annotate, BoxFrameSitsOutsideTheBox) {
  Image img(20, 20);
  draw_box(img, BoundingBox{5, 5, 6, 4}, {255, 0, 0}, 2);
  std::size_t red = 0;
  for (std::size_t y = 0; y < 20; ++y) {
    for (std::size_t x = 0; x < 20; ++x) {
      const bool inside = x >= 5 && x < 11 && y >= 5 && y < 9;
      if (img.get(x, y) == Rgb{255, 0, 0}) {
        ++red;
        EXPECT_FALSE(inside);
      }
    }
  }
  EXPECT_EQ(red, 10u * 8u - 6u * 4u);
}

TEST(Annotate, TextIsClippedAtTheEdge) {
  Image img(10, 10);
  draw_text(img, 4, 4, "Z-1 0.5", {9, 9, 9}, 2);
  EXPECT_EQ(img.width, 10u);
  bool any = false;
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) any |= img.pixels[i] == 9;
  EXPECT_TRUE(any);
}

}  // namespace
}  // namespace seedscan
