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
#include <filesystem>
#include <vector>

namespace seedscan {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, interleaved, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, Rgb fill = {});

  bool empty() const noexcept { return width == 0 || height == 0; }
  Rgb get(std::size_t x, std::size_t y) const noexcept {
    const std::uint8_t* p = &pixels[(y * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(std::size_t x, std::size_t y, Rgb c) noexcept {
    std::uint8_t* p = &pixels[(y * width + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Rec. 601 luma rounded to the nearest integer in [0, 255].
std::uint8_t luminance(Rgb c) noexcept;

/// Decodes PNG or JPEG, chosen by file signature. IoError if the file cannot
/// be read, IngestionError if it cannot be decoded.
Image read_image(const std::filesystem::path& path);

void write_png(const Image& image, const std::filesystem::path& path);
void write_jpeg(const Image& image, const std::filesystem::path& path, int quality = 95);

/// Copy of the rectangle [x, x + w) x [y, y + h); must lie inside the image.
Image crop(const Image& image, std::size_t x, std::size_t y, std::size_t w, std::size_t h);

}  // namespace seedscan

namespace seedscan {

/// Axis-aligned pixel rectangle [x, x + width) x [y, y + height).
struct BoundingBox {
  std::size_t x = 0, y = 0, width = 0, height = 0;
  std::size_t area() const noexcept { return width * height; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union; 0 when either box is empty.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

}  // namespace seedscan
