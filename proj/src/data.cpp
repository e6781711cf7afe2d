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

#include "seedscan/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>
#include <system_error>

#include "seedscan/errors.hpp"
#include "seedscan/rng.hpp"

namespace seedscan {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<LabeledImage>& sort_by_identifier(std::vector<LabeledImage>& images) {
  std::sort(images.begin(), images.end(), [](const LabeledImage& a, const LabeledImage& b) {
    return a.identifier < b.identifier;
  });
  return images;
}

}  // namespace

ClassCounts count_classes(const std::vector<LabeledImage>& images) {
  ClassCounts counts;
  for (const LabeledImage& img : images) {
    (img.label == KernelLabel::kNormal ? counts.normal : counts.abnormal)++;
  }
  return counts;
}

std::string_view split_dir_name(SplitKind split) noexcept {
  switch (split) {
    case SplitKind::kTrain:
      return "train";
    case SplitKind::kValidate:
      return "validate";
    case SplitKind::kTest:
      return "test";
  }
  return "";
}

std::string_view class_dir_name(KernelLabel label) noexcept {
  return label == KernelLabel::kNormal ? "normal" : "abnormal";
}

std::vector<LabeledImage>& DatasetSplit::get(SplitKind split) {
  switch (split) {
    case SplitKind::kTrain:
      return train;
    case SplitKind::kValidate:
      return validate;
    case SplitKind::kTest:
      break;
  }
  return test;
}

const std::vector<LabeledImage>& DatasetSplit::get(SplitKind split) const {
  return const_cast<DatasetSplit*>(this)->get(split);
}

std::vector<LabeledImage> load_class_directory(const fs::path& dir, KernelLabel label) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw LayoutError("missing directory '" + dir.string() + "'");
  }
  std::vector<fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list '" + dir.string() + "': " + ec.message());
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });

  std::vector<LabeledImage> images(files.size());
  std::vector<std::exception_ptr> failures(files.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < static_cast<long>(files.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      images[k] = LabeledImage{files[k].filename().string(), read_image(files[k]), label};
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  // Report the first failure in file order, independent of scheduling.
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return images;
}

DatasetSplit load_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw LayoutError("missing dataset root '" + root.string() + "'");
  }
  DatasetSplit dataset;
  std::set<std::string> seen;
  for (SplitKind split : kAllSplits) {
    std::vector<LabeledImage>& images = dataset.get(split);
    for (KernelLabel label : {KernelLabel::kNormal, KernelLabel::kAbnormal}) {
      const fs::path dir = root / split_dir_name(split) / class_dir_name(label);
      std::vector<LabeledImage> loaded = load_class_directory(dir, label);
      if (loaded.empty()) {
        throw LayoutError("directory '" + dir.string() + "' contains no images");
      }
      for (LabeledImage& img : loaded) images.push_back(std::move(img));
    }
    sort_by_identifier(images);
    for (const LabeledImage& img : images) {
      if (!seen.insert(img.identifier).second) {
        throw ValidationError("identifier '" + img.identifier +
                              "' appears more than once in the dataset (found again in " +
                              std::string(split_dir_name(split)) + ")");
      }
    }
  }
  return dataset;
}

// ---------------------------------------------------------------------------

void preprocess_into(const Image& image, std::size_t target_height,
                     std::size_t target_width, double* out) {
  if (image.empty()) throw ValidationError("cannot preprocess an empty image");
  if (target_height == 0 || target_width == 0) {
    throw ValidationError("preprocess target size must be positive");
  }
  const std::size_t in_h = image.height, in_w = image.width;
  const double scale_y = static_cast<double>(in_h) / static_cast<double>(target_height);
  const double scale_x = static_cast<double>(in_w) / static_cast<double>(target_width);

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t count, std::size_t in, double scale) {
    std::vector<Tap> result(count);
    for (std::size_t i = 0; i < count; ++i) {
      double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(s);
      result[i] = {lo, std::min(lo + 1, in - 1), s - static_cast<double>(lo)};
    }
    return result;
  };
  const std::vector<Tap> ys = taps(target_height, in_h, scale_y);
  const std::vector<Tap> xs = taps(target_width, in_w, scale_x);

  const std::size_t plane = target_height * target_width;
  const std::uint8_t* px = image.pixels.data();
  for (std::size_t y = 0; y < target_height; ++y) {
    const Tap& ty = ys[y];
    for (std::size_t x = 0; x < target_width; ++x) {
      const Tap& tx = xs[x];
      for (std::size_t c = 0; c < 3; ++c) {
        const double a = px[(ty.lo * in_w + tx.lo) * 3 + c];
        const double b = px[(ty.lo * in_w + tx.hi) * 3 + c];
        const double d = px[(ty.hi * in_w + tx.lo) * 3 + c];
        const double e = px[(ty.hi * in_w + tx.hi) * 3 + c];
        const double top = (1.0 - tx.frac) * a + tx.frac * b;
        const double bottom = (1.0 - tx.frac) * d + tx.frac * e;
        const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
        out[c * plane + y * target_width + x] = v / 255.0;
      }
    }
  }
}

Tensor preprocess(const Image& image, std::size_t target_height, std::size_t target_width) {
  if (target_height == 0 || target_width == 0) {
    throw ValidationError("preprocess target size must be positive");
  }
  Tensor out({3, target_height, target_width});
  preprocess_into(image, target_height, target_width, out.raw());
  return out;
}

PreparedSet prepare(const std::vector<LabeledImage>& images, std::size_t height,
                    std::size_t width) {
  if (images.empty()) throw ValidationError("cannot prepare an empty image list");
  PreparedSet set;
  set.images = Tensor({images.size(), 3, height, width});
  const std::size_t stride = 3 * height * width;
  std::vector<std::exception_ptr> failures(images.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(images.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      preprocess_into(images[k].pixels, height, width, set.images.raw() + k * stride);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  for (const LabeledImage& img : images) {
    set.identifiers.push_back(img.identifier);
    set.labels.push_back(img.label);
  }
  return set;
}

// ---------------------------------------------------------------------------

AugmentationConfig parse_augmentation(std::string_view text) {
  AugmentationConfig config;
  if (text.empty() || text == "none") return config;
  std::stringstream stream{std::string(text)};
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item == "hflip") {
      config.horizontal_flip = true;
    } else if (item == "vflip") {
      config.vertical_flip = true;
    } else if (item == "rot90") {
      config.rotate90 = true;
    } else if (item.rfind("brightness=", 0) == 0) {
      const std::string value = item.substr(11);
      char* end = nullptr;
      const double fraction = std::strtod(value.c_str(), &end);
      if (value.empty() || *end != '\0' || !(fraction >= 0.0 && fraction < 1.0)) {
        throw ValidationError("brightness fraction must be in [0, 1), got '" + value + "'");
      }
      config.brightness = fraction;
    } else {
      throw ValidationError("unknown augmentation '" + item +
                            "' (expected hflip, vflip, rot90, brightness=<f> or none)");
    }
  }
  return config;
}

std::string format_augmentation(const AugmentationConfig& config) {
  std::vector<std::string> parts;
  if (config.horizontal_flip) parts.emplace_back("hflip");
  if (config.vertical_flip) parts.emplace_back("vflip");
  if (config.rotate90) parts.emplace_back("rot90");
  if (config.brightness > 0.0) {
    std::ostringstream b;
    b << "brightness=" << config.brightness;
    parts.push_back(b.str());
  }
  if (parts.empty()) return "none";
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out += "," + parts[i];
  return out;
}

Image flip_horizontal(const Image& image) {
  Image out(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      out.set(image.width - 1 - x, y, image.get(x, y));
    }
  }
  return out;
}

Image flip_vertical(const Image& image) {
  Image out(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      out.set(x, image.height - 1 - y, image.get(x, y));
    }
  }
  return out;
}

Image rotate90(const Image& image, int quarter_turns) {
  const int turns = ((quarter_turns % 4) + 4) % 4;
  if (turns == 0) return image;
  Image out = (turns == 2) ? Image(image.width, image.height)
                           : Image(image.height, image.width);
  const std::size_t w = image.width, h = image.height;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const Rgb c = image.get(x, y);
      switch (turns) {
        case 1:  // counter-clockwise
          out.set(y, w - 1 - x, c);
          break;
        case 2:
          out.set(w - 1 - x, h - 1 - y, c);
          break;
        default:
          out.set(h - 1 - y, x, c);
          break;
      }
    }
  }
  return out;
}

Image adjust_brightness(const Image& image, double fraction) {
  Image out = image;
  const double factor = 1.0 + fraction;
  for (std::uint8_t& v : out.pixels) {
    const long scaled = std::lround(static_cast<double>(v) * factor);
    v = static_cast<std::uint8_t>(std::clamp(scaled, 0L, 255L));
  }
  return out;
}

LabeledImage augment(const LabeledImage& image, const AugmentationConfig& config,
                     std::uint64_t draw_index) {
  LabeledImage out = image;
  if (!config.enabled()) return out;
  // Always draw every variate so enabling one transform does not perturb the
  // others.
  Rng rng(mix_seed(config.seed, draw_index));
  const bool hflip = rng.chance(0.5);
  const bool vflip = rng.chance(0.5);
  const int turns = static_cast<int>(rng.below(4));
  const double jitter = rng.uniform(-1.0, 1.0);
  if (config.horizontal_flip && hflip) out.pixels = flip_horizontal(out.pixels);
  if (config.vertical_flip && vflip) out.pixels = flip_vertical(out.pixels);
  if (config.rotate90 && turns != 0) out.pixels = rotate90(out.pixels, turns);
  if (config.brightness > 0.0) {
    out.pixels = adjust_brightness(out.pixels, jitter * config.brightness);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed,
                                           std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, epoch));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

BatchIterator::BatchIterator(std::shared_ptr<const PreparedSet> set, std::size_t batch_size,
                             std::uint64_t seed, std::uint64_t epoch)
    : set_(std::move(set)), batch_size_(batch_size) {
  if (!set_ || set_->size() == 0) throw ValidationError("cannot batch an empty split");
  if (batch_size_ == 0) throw ValidationError("batch size must be >= 1");
  order_ = epoch_permutation(set_->size(), seed, epoch);
}

std::size_t BatchIterator::batch_count() const noexcept {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

bool BatchIterator::next(Batch& batch) {
  if (position_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), position_ + batch_size_);
  std::vector<std::size_t> indices(order_.begin() + static_cast<long>(position_),
                                   order_.begin() + static_cast<long>(end));
  position_ = end;
  batch = gather(*set_, indices);
  return true;
}

Batch gather(const PreparedSet& set, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw UsageError("gather of an empty index list");
  Shape shape = set.images.shape();
  const std::size_t stride = set.images.size() / shape[0];
  shape[0] = indices.size();
  Batch batch{Tensor(shape), Tensor({indices.size()}), indices};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= set.size()) throw UsageError("gather index out of range");
    std::copy(set.images.raw() + src * stride, set.images.raw() + (src + 1) * stride,
              batch.images.raw() + i * stride);
    batch.targets[i] = encode_label(set.labels[src]);
  }
  return batch;
}

BatchIterator batch_iter(const std::vector<LabeledImage>& images, std::size_t batch_size,
                         std::uint64_t seed, std::uint64_t epoch, std::size_t height,
                         std::size_t width) {
  if (images.empty()) throw ValidationError("cannot batch an empty split");
  return BatchIterator(std::make_shared<PreparedSet>(prepare(images, height, width)),
                       batch_size, seed, epoch);
}

}  // namespace seedscan
