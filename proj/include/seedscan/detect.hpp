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
#include <cstdint>
#include <vector>

#include "seedscan/image.hpp"
#include "seedscan/model.hpp"
#include "seedscan/report.hpp"

namespace seedscan {

/// Binary mask, one byte per pixel (0 or 1), row-major.
struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  std::size_t count() const noexcept;
};

/// Otsu threshold of a 256-bin histogram: the cut t maximizing between-class
/// variance of {<= t} vs {> t}. Returns -1 when the histogram has a single
/// occupied bin.
int otsu_threshold(const std::vector<std::size_t>& histogram);

/// Pixels whose luminance exceeds the Otsu threshold, with polarity fixed so
/// that foreground is the minority, and enclosed holes filled. A uniform
/// image yields an empty mask.
Mask segment_foreground(const Image& image);

/// 8-connected components with at least `min_area` pixels; boxes sorted by
/// (y, x) of their top-left corner.
std::vector<BoundingBox> connected_components(const Mask& mask, std::size_t min_area = 64);

struct InspectConfig {
  ModelConfig model;            // input size the crops are resized to
  std::size_t min_area = 64;
  /// Kernel extent as a fraction of the square crop side, matching how much
  /// of the canvas a kernel fills in the training images.
  double fill_fraction = 0.6;
};

struct Inspection {
  Report report;      // rows "Z-1".. in component order
  Image annotated;
  std::vector<Image> crops;  // square crops fed to the model, one per row
};

/// Detect, crop, classify and annotate every kernel in `image`.
Inspection inspect_scene(const Image& image, const ModelParameters& params,
                         const InspectConfig& config);

/// Draws `text` (digits, '.', '-', 'Z') with a 3x5 bitmap font.
void draw_text(Image& image, std::size_t x, std::size_t y, std::string_view text, Rgb color,
               std::size_t scale = 2);
void draw_box(Image& image, const BoundingBox& box, Rgb color, std::size_t thickness = 2);

}  // namespace seedscan
