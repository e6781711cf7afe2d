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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "seedscan/data.hpp"
#include "seedscan/image.hpp"
#include "seedscan/model.hpp"

namespace seedscan {

enum class DefectKind { kCrack, kMissingChunk, kWrinkle, kDarkBlotch };

std::string_view defect_name(DefectKind kind) noexcept;

/// One defect in kernel-local coordinates, where the kernel ellipse is the
/// unit disc (u along the major axis, v along the minor axis).
struct Defect {
  DefectKind kind = DefectKind::kDarkBlotch;
  double u = 0.0, v = 0.0;  // anchor: blob/patch center, or crack/bite edge point
  double size = 0.0;        // blob/patch radius, crack length, bite radius (unit disc)
  double angle = 0.0;       // crack direction offset or stripe orientation (radians)
  double width = 0.0;       // crack width in pixels
  double phase = 0.0;       // blob wobble / stripe phase
  Rgb color;
};

/// Everything needed to draw one kernel.
struct KernelAppearance {
  double center_x = 0.0, center_y = 0.0;  // pixels
  double semi_major = 0.0, semi_minor = 0.0;
  double angle = 0.0;  // radians, major axis from +x
  Rgb base;            // yellow-orange body color
  Rgb tip;             // near-white tip color
  double tip_start = 0.6;  // tip begins where -u exceeds this
  double gloss_u = 0.0, gloss_v = 0.0, gloss_radius = 0.2, gloss_strength = 0.4;
  std::vector<Defect> defects;

  KernelLabel label() const noexcept {
    return defects.empty() ? KernelLabel::kNormal : KernelLabel::kAbnormal;
  }
};

struct GeneratorOptions {
  /// Smallest pixel area, as a fraction of the kernel ellipse, that the
  /// largest defect of an abnormal kernel must cover. 0.05 is the "easy"
  /// default; values below 0.02 are rejected.
  double defect_area_fraction = 0.05;
  std::uint8_t background = 30;
};

void validate(const GeneratorOptions& options);

/// Rendered kernel plus the masks the renderer used.
struct KernelRender {
  Image image;
  std::vector<std::uint8_t> ellipse_mask;  // ideal ellipse
  std::vector<std::uint8_t> kernel_mask;   // pixels actually painted as kernel
  std::vector<std::uint8_t> defect_mask;   // defect pixels, including missing ones
  std::vector<std::size_t> defect_areas;   // per defect, pixels it claimed
  KernelAppearance appearance;
};

/// Random appearance for a kernel on a width x height canvas, centered with
/// mild jitter. The major axis spans 40-80% of the smaller canvas side.
KernelAppearance sample_appearance(KernelLabel label, std::uint64_t seed, std::size_t width,
                                   std::size_t height, const GeneratorOptions& options,
                                   bool jitter_center = true);

KernelRender render_kernel(const KernelAppearance& appearance, std::size_t width,
                           std::size_t height, const GeneratorOptions& options);

/// Samples and renders, enlarging defects until the largest one reaches
/// options.defect_area_fraction of the ellipse.
KernelRender generate_kernel_render(KernelLabel label, std::uint64_t seed, std::size_t size,
                                    const GeneratorOptions& options = {});

/// size x size labeled kernel image; size must be >= 32.
LabeledImage generate_kernel_image(KernelLabel label, std::uint64_t seed, std::size_t size,
                                   const GeneratorOptions& options = {});

// ---------------------------------------------------------------------------
// Dataset trees
// ---------------------------------------------------------------------------

/// Requested image counts, indexed by SplitKind.
struct DatasetCounts {
  std::array<ClassCounts, 3> splits{};

  std::size_t total() const noexcept;
  /// Parses "tn,ta,vn,va,sn,sa" (normal/abnormal per train, validate, test).
  static DatasetCounts parse(std::string_view text);
  /// 500/500, 300/300, 100/100.
  static DatasetCounts standard();
};

struct GeneratedFile {
  std::string identifier;
  SplitKind split;
  KernelLabel label;
  std::vector<DefectKind> defects;
};

/// Writes out_dir/{split}/{class}/kNNNNN.png plus out_dir/manifest.jsonl.
/// Every file depends only on (seed, its global index).
std::vector<GeneratedFile> generate_dataset(const DatasetCounts& counts, std::uint64_t seed,
                                            const std::filesystem::path& out_dir,
                                            std::size_t size = 250,
                                            const GeneratorOptions& options = {});

// ---------------------------------------------------------------------------
// Multi-kernel scenes
// ---------------------------------------------------------------------------

struct SceneSpec {
  std::size_t width = 800;
  std::size_t height = 600;
  std::vector<KernelLabel> labels;  // one entry per kernel
  std::size_t kernel_canvas = 96;   // side of each kernel's local canvas
  std::size_t margin = 4;           // minimum gap between kernel ellipses
};

/// Spec with `normal` + `abnormal` labels in a seed-shuffled order.
SceneSpec scene_spec_with_counts(std::size_t normal, std::size_t abnormal,
                                 std::uint64_t seed);

struct SceneKernel {
  BoundingBox box;  // tight around painted kernel pixels
  KernelLabel label;
  double center_x = 0.0, center_y = 0.0, radius = 0.0;  // bounding circle
};

struct Scene {
  Image image;
  std::vector<SceneKernel> kernels;
  std::vector<std::uint8_t> kernel_mask;  // union of painted kernel pixels
};

/// Places kernels by rejection sampling (at most 10,000 attempts in total);
/// CapacityError if they do not fit.
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed,
                     const GeneratorOptions& options = {});

/// Writes the scene PNG and a one-record manifest listing kernel boxes.
void write_scene(const Scene& scene, const std::filesystem::path& image_path,
                 const std::filesystem::path& manifest_path);

}  // namespace seedscan
