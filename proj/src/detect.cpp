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

#include "seedscan/detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "seedscan/data.hpp"
#include "seedscan/errors.hpp"

namespace seedscan {

namespace {

struct Component {
  BoundingBox box;
  std::size_t area = 0;
  int label = 0;
};

struct Labeling {
  std::vector<int> labels;  // 0 = background, otherwise 1-based component id
  std::vector<Component> components;
};

Labeling label_components(const Mask& mask) {
  const std::size_t w = mask.width, h = mask.height;
  Labeling out;
  out.labels.assign(w * h, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < w * h; ++start) {
    if (!mask.bits[start] || out.labels[start]) continue;
    const int id = static_cast<int>(out.components.size()) + 1;
    std::size_t x0 = w, y0 = h, x1 = 0, y1 = 0, area = 0;
    out.labels[start] = id;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t px = p % w, py = p / w;
      ++area;
      x0 = std::min(x0, px), x1 = std::max(x1, px);
      y0 = std::min(y0, py), y1 = std::max(y1, py);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const auto nx = static_cast<std::ptrdiff_t>(px) + dx;
          const auto ny = static_cast<std::ptrdiff_t>(py) + dy;
          if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(w) ||
              ny >= static_cast<std::ptrdiff_t>(h)) {
            continue;
          }
          const std::size_t q = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          if (mask.bits[q] && !out.labels[q]) {
            out.labels[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    out.components.push_back({{x0, y0, x1 - x0 + 1, y1 - y0 + 1}, area, id});
  }
  return out;
}

// Background regions not reachable from the border (4-connectivity, the dual
// of 8-connected foreground) become foreground.
void fill_holes(Mask& mask) {
  const std::size_t w = mask.width, h = mask.height;
  std::vector<std::uint8_t> outside(w * h, 0);
  std::vector<std::size_t> stack;
  auto seed = [&](std::size_t x, std::size_t y) {
    const std::size_t p = y * w + x;
    if (!mask.bits[p] && !outside[p]) {
      outside[p] = 1;
      stack.push_back(p);
    }
  };
  for (std::size_t x = 0; x < w; ++x) seed(x, 0), seed(x, h - 1);
  for (std::size_t y = 0; y < h; ++y) seed(0, y), seed(w - 1, y);
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    const std::size_t x = p % w, y = p / w;
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  for (std::size_t p = 0; p < w * h; ++p) {
    if (!outside[p]) mask.bits[p] = 1;
  }
}

Rgb estimate_background(const Image& image, const Mask& mask) {
  double sum[3] = {0, 0, 0};
  std::size_t n = 0;
  for (std::size_t p = 0; p < image.width * image.height; ++p) {
    if (mask.bits[p]) continue;
    for (int c = 0; c < 3; ++c) sum[c] += image.pixels[p * 3 + c];
    ++n;
  }
  if (n == 0) return {};
  auto avg = [&](int c) {
    return static_cast<std::uint8_t>(std::lround(sum[c] / static_cast<double>(n)));
  };
  return {avg(0), avg(1), avg(2)};
}

// 3x5 glyphs, one row per entry, bit 2 = leftmost column.
const std::array<std::uint8_t, 5>* glyph(char c) {
  static const std::array<std::uint8_t, 5> kDigits[10] = {
      {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
      {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}};
  static const std::array<std::uint8_t, 5> kDot{0, 0, 0, 0, 2};
  static const std::array<std::uint8_t, 5> kDash{0, 0, 7, 0, 0};
  static const std::array<std::uint8_t, 5> kZ{7, 1, 2, 4, 7};
  if (c >= '0' && c <= '9') return &kDigits[c - '0'];
  if (c == '.') return &kDot;
  if (c == '-') return &kDash;
  if (c == 'Z') return &kZ;
  return nullptr;
}

}  // namespace

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

int otsu_threshold(const std::vector<std::size_t>& histogram) {
  if (histogram.size() != 256) throw ValidationError("histogram must have 256 bins");
  double total = 0, weighted = 0;
  std::size_t occupied = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    total += static_cast<double>(histogram[i]);
    weighted += static_cast<double>(i) * static_cast<double>(histogram[i]);
    occupied += histogram[i] > 0;
  }
  if (occupied < 2) return -1;
  double w0 = 0, sum0 = 0, best = -1.0;
  int best_t = -1;
  for (int t = 0; t < 255; ++t) {
    w0 += static_cast<double>(histogram[t]);
    sum0 += t * static_cast<double>(histogram[t]);
    const double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = sum0 / w0, mu1 = (weighted - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

Mask segment_foreground(const Image& image) {
  if (image.empty()) throw ValidationError("cannot segment an empty image");
  Mask mask{image.width, image.height, std::vector<std::uint8_t>(image.width * image.height, 0)};
  std::vector<std::uint8_t> luma(image.width * image.height);
  std::vector<std::size_t> histogram(256, 0);
  for (std::size_t p = 0; p < luma.size(); ++p) {
    luma[p] = luminance({image.pixels[p * 3], image.pixels[p * 3 + 1], image.pixels[p * 3 + 2]});
    ++histogram[luma[p]];
  }
  const int t = otsu_threshold(histogram);
  if (t < 0) return mask;
  for (std::size_t p = 0; p < luma.size(); ++p) mask.bits[p] = luma[p] > t;
  // Kernels are the minority class; a majority mask means the polarity is
  // reversed (bright background).
  if (mask.count() * 2 > mask.bits.size()) {
    for (std::uint8_t& b : mask.bits) b ^= 1;
  }
  fill_holes(mask);
  return mask;
}

std::vector<BoundingBox> connected_components(const Mask& mask, std::size_t min_area) {
  const Labeling labeling = label_components(mask);
  std::vector<BoundingBox> boxes;
  for (const Component& c : labeling.components) {
    if (c.area >= min_area) boxes.push_back(c.box);
  }
  std::sort(boxes.begin(), boxes.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return boxes;
}

void draw_box(Image& image, const BoundingBox& box, Rgb color, std::size_t thickness) {
  if (image.empty() || box.area() == 0) return;
  // The frame sits just outside the box so kernel pixels stay visible.
  const auto x0 = static_cast<std::ptrdiff_t>(box.x) - static_cast<std::ptrdiff_t>(thickness);
  const auto y0 = static_cast<std::ptrdiff_t>(box.y) - static_cast<std::ptrdiff_t>(thickness);
  const auto x1 = static_cast<std::ptrdiff_t>(box.x + box.width + thickness);
  const auto y1 = static_cast<std::ptrdiff_t>(box.y + box.height + thickness);
  const auto t = static_cast<std::ptrdiff_t>(thickness);
  for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(y0, 0);
       y < std::min<std::ptrdiff_t>(y1, static_cast<std::ptrdiff_t>(image.height)); ++y) {
    for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(x0, 0);
         x < std::min<std::ptrdiff_t>(x1, static_cast<std::ptrdiff_t>(image.width)); ++x) {
      const bool edge = x < x0 + t || x >= x1 - t || y < y0 + t || y >= y1 - t;
      if (edge) image.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), color);
    }
  }
}

void draw_text(Image& image, std::size_t x, std::size_t y, std::string_view text, Rgb color,
               std::size_t scale) {
  std::size_t cursor = x;
  for (char c : text) {
    if (const auto* g = glyph(c)) {
      for (std::size_t row = 0; row < 5; ++row) {
        for (std::size_t col = 0; col < 3; ++col) {
          if (!((*g)[row] >> (2 - col) & 1)) continue;
          for (std::size_t sy = 0; sy < scale; ++sy) {
            for (std::size_t sx = 0; sx < scale; ++sx) {
              const std::size_t px = cursor + col * scale + sx, py = y + row * scale + sy;
              if (px < image.width && py < image.height) image.set(px, py, color);
            }
          }
        }
      }
    }
    cursor += 4 * scale;
  }
}

Inspection inspect_scene(const Image& image, const ModelParameters& params,
                         const InspectConfig& config) {
  config.model.validate();
  Inspection out;
  out.report.kind = "inspection";
  out.annotated = image;

  const Mask mask = segment_foreground(image);
  const Labeling labeling = label_components(mask);
  std::vector<Component> kept;
  for (const Component& c : labeling.components) {
    if (c.area >= config.min_area) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Component& a, const Component& b) {
    return a.box.y != b.box.y ? a.box.y < b.box.y : a.box.x < b.box.x;
  });
  if (kept.empty()) return out;

  const Rgb background = estimate_background(image, mask);
  const std::size_t h = config.model.input_height, w = config.model.input_width;
  const std::size_t plane = 3 * h * w;
  Tensor batch({kept.size(), 3, h, w});
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const BoundingBox& box = kept[i].box;
    const std::size_t extent = std::max(box.width, box.height);
    const std::size_t side = std::max(
        extent, static_cast<std::size_t>(std::ceil(static_cast<double>(extent) /
                                                   config.fill_fraction)));
    const auto ox = static_cast<std::ptrdiff_t>(2 * box.x + box.width) / 2 -
                    static_cast<std::ptrdiff_t>(side / 2);
    const auto oy = static_cast<std::ptrdiff_t>(2 * box.y + box.height) / 2 -
                    static_cast<std::ptrdiff_t>(side / 2);
    Image crop(side, side, background);
    for (std::size_t cy = 0; cy < side; ++cy) {
      const std::ptrdiff_t sy = oy + static_cast<std::ptrdiff_t>(cy);
      if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(image.height)) continue;
      for (std::size_t cx = 0; cx < side; ++cx) {
        const std::ptrdiff_t sx = ox + static_cast<std::ptrdiff_t>(cx);
        if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(image.width)) continue;
        const std::size_t p = static_cast<std::size_t>(sy) * image.width +
                              static_cast<std::size_t>(sx);
        const int owner = labeling.labels[p];
        // Pixels of neighbouring kernels are replaced by background.
        if (owner != 0 && owner != kept[i].label) continue;
        crop.set(cx, cy, image.get(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy)));
      }
    }
    preprocess_into(crop, h, w, batch.raw() + i * plane);
    out.crops.push_back(std::move(crop));
  }

  const Tensor probabilities = predict(params, batch);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ReportRow row = make_row("Z-" + std::to_string(i + 1), probabilities[i]);
    row.box = kept[i].box;
    out.report.rows.push_back(std::move(row));
  }

  const Rgb green{40, 220, 60}, red{235, 40, 40};
  for (const ReportRow& row : out.report.rows) {
    const Rgb color = row.predict == KernelLabel::kNormal ? green : red;
    draw_box(out.annotated, *row.box, color);
    const std::string label = row.identifier + " " + format_calculation(row.probability);
    const std::size_t text_h = 10;
    const std::size_t ty = row.box->y >= text_h + 4 ? row.box->y - text_h - 4
                                                     : row.box->y + row.box->height + 4;
    draw_text(out.annotated, row.box->x, ty, label, color);
  }
  return out;
}

}  // namespace seedscan
