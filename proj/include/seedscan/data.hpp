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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "seedscan/image.hpp"
#include "seedscan/model.hpp"
#include "seedscan/tensor.hpp"

namespace seedscan {

struct LabeledImage {
  std::string identifier;  // file name, unique across the whole dataset
  Image pixels;
  KernelLabel label = KernelLabel::kNormal;
};

struct ClassCounts {
  std::size_t normal = 0;
  std::size_t abnormal = 0;
  std::size_t total() const noexcept { return normal + abnormal; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_classes(const std::vector<LabeledImage>& images);

enum class SplitKind { kTrain, kValidate, kTest };
inline constexpr std::array<SplitKind, 3> kAllSplits{SplitKind::kTrain, SplitKind::kValidate,
                                                     SplitKind::kTest};
/// Directory name of a split: "train", "validate" or "test".
std::string_view split_dir_name(SplitKind split) noexcept;
/// Directory name of a class: "normal" or "abnormal".
std::string_view class_dir_name(KernelLabel label) noexcept;

struct DatasetSplit {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> validate;
  std::vector<LabeledImage> test;

  std::vector<LabeledImage>& get(SplitKind split);
  const std::vector<LabeledImage>& get(SplitKind split) const;
};

/// Reads root/{train,validate,test}/{normal,abnormal}/*.{png,jpg,jpeg}.
///
/// Every class directory must exist and be non-empty (LayoutError). Files that
/// fail to decode raise IngestionError naming the file. Images within a split
/// are ordered by identifier; identifiers must be unique across all splits.
/// Decoding runs in parallel; the result does not depend on thread count.
DatasetSplit load_dataset(const std::filesystem::path& root);

/// Loads one flat directory of images with a single label.
std::vector<LabeledImage> load_class_directory(const std::filesystem::path& dir,
                                               KernelLabel label);

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

/// Bilinear resize (half-pixel centers) to target size, channels scaled to
/// [0, 1], channel-first 3 x H x W.
Tensor preprocess(const Image& image, std::size_t target_height, std::size_t target_width);

/// Writes the 3 x H x W preprocessing of `image` to `out`.
void preprocess_into(const Image& image, std::size_t target_height,
                     std::size_t target_width, double* out);

/// Images preprocessed once into a single N x 3 x H x W tensor.
struct PreparedSet {
  std::vector<std::string> identifiers;
  std::vector<KernelLabel> labels;
  Tensor images;

  std::size_t size() const noexcept { return labels.size(); }
};

PreparedSet prepare(const std::vector<LabeledImage>& images, std::size_t height,
                    std::size_t width);

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

struct AugmentationConfig {
  bool horizontal_flip = false;
  bool vertical_flip = false;
  bool rotate90 = false;     // random multiple of 90 degrees
  double brightness = 0.0;   // max |fraction| of brightness jitter
  std::uint64_t seed = 0;

  bool enabled() const noexcept {
    return horizontal_flip || vertical_flip || rotate90 || brightness > 0.0;
  }
};

/// Parses "none" or a comma list of hflip, vflip, rot90, brightness=<fraction>.
AugmentationConfig parse_augmentation(std::string_view text);
std::string format_augmentation(const AugmentationConfig& config);

Image flip_horizontal(const Image& image);
Image flip_vertical(const Image& image);
/// Counter-clockwise by quarter_turns * 90 degrees.
Image rotate90(const Image& image, int quarter_turns);
/// Each channel becomes clamp(round(v * (1 + fraction)), 0, 255).
Image adjust_brightness(const Image& image, double fraction);

/// Label-preserving random transform; deterministic in (config.seed, draw_index).
LabeledImage augment(const LabeledImage& image, const AugmentationConfig& config,
                     std::uint64_t draw_index);

// ---------------------------------------------------------------------------
// Batching
// ---------------------------------------------------------------------------

/// Shuffled order of [0, n); a pure function of (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed,
                                           std::uint64_t epoch);

struct Batch {
  Tensor images;                     // B x 3 x H x W
  Tensor targets;                    // B, encoded labels
  std::vector<std::size_t> indices;  // positions in the source set
};

/// Walks a prepared set in the epoch's shuffled order. The last batch may be
/// short.
class BatchIterator {
 public:
  BatchIterator(std::shared_ptr<const PreparedSet> set, std::size_t batch_size,
                std::uint64_t seed, std::uint64_t epoch);

  bool next(Batch& batch);
  std::size_t batch_count() const noexcept;

 private:
  std::shared_ptr<const PreparedSet> set_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t position_ = 0;
};

/// Preprocesses `images` to height x width and iterates them in batches.
BatchIterator batch_iter(const std::vector<LabeledImage>& images, std::size_t batch_size,
                         std::uint64_t seed, std::uint64_t epoch, std::size_t height,
                         std::size_t width);

/// Copies rows `indices` of a prepared set into a batch.
Batch gather(const PreparedSet& set, const std::vector<std::size_t>& indices);

}  // namespace seedscan
