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

#include "seedscan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "seedscan/errors.hpp"
#include "seedscan/rng.hpp"

namespace seedscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Defects never reach closer to the rim than this (unit-disc radius), so a
// ring of body pixels keeps every kernel one connected blob.
constexpr double kInteriorReach = 0.75;

Rgb hsv_to_rgb(double hue_deg, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(hue_deg, 360.0) / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c, g = x;
  } else if (hp < 2) {
    r = x, g = c;
  } else if (hp < 3) {
    g = c, b = x;
  } else if (hp < 4) {
    g = x, b = c;
  } else if (hp < 5) {
    r = x, b = c;
  } else {
    r = c, b = x;
  }
  const double m = v - c;
  auto to8 = [](double f) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(f * 255.0), 0L, 255L));
  };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

struct Color {
  double r, g, b;
};

Color to_color(Rgb c) { return {double(c.r), double(c.g), double(c.b)}; }

Color mix(Color a, Color b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

Rgb to_rgb(Color c) {
  auto q = [](double f) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(f), 0L, 255L));
  };
  return {q(c.r), q(c.g), q(c.b)};
}

double smoothstep(double lo, double hi, double x) {
  const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Kernel-local frame: maps between pixel coordinates and the unit disc.
struct Frame {
  double cx, cy, a, b, cos_t, sin_t;

  explicit Frame(const KernelAppearance& app)
      : cx(app.center_x),
        cy(app.center_y),
        a(app.semi_major),
        b(app.semi_minor),
        cos_t(std::cos(app.angle)),
        sin_t(std::sin(app.angle)) {}

  void to_local(double px, double py, double& u, double& v) const {
    const double dx = px - cx, dy = py - cy;
    u = (dx * cos_t + dy * sin_t) / a;
    v = (-dx * sin_t + dy * cos_t) / b;
  }
  void to_pixel(double u, double v, double& px, double& py) const {
    px = cx + a * u * cos_t - b * v * sin_t;
    py = cy + a * u * sin_t + b * v * cos_t;
  }
};

// Crack as a pixel-space segment.
struct Segment {
  double x0, y0, x1, y1, half_width;

  bool covers(double px, double py) const {
    const double vx = x1 - x0, vy = y1 - y0;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((px - x0) * vx + (py - y0) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = x0 + t * vx - px, ey = y0 + t * vy - py;
    return ex * ex + ey * ey <= half_width * half_width;
  }
};

Segment crack_segment(const Defect& d, const Frame& frame) {
  // Direction toward the center, rotated by the jitter angle.
  const double base = std::atan2(-d.v, -d.u) + d.angle;
  const double du = std::cos(base), dv = std::sin(base);
  // Start slightly outside the rim so the crack opens onto the edge.
  Segment s{};
  frame.to_pixel(d.u - 0.05 * du, d.v - 0.05 * dv, s.x0, s.y0);
  frame.to_pixel(d.u + d.size * du, d.v + d.size * dv, s.x1, s.y1);
  s.half_width = d.width / 2.0;
  return s;
}

bool blotch_covers(const Defect& d, double u, double v) {
  const double du = u - d.u, dv = v - d.v;
  const double theta = std::atan2(dv, du);
  const double radius =
      d.size * (1.0 + 0.2 * std::sin(3.0 * theta + d.phase) +
                0.1 * std::sin(5.0 * theta + 2.0 * d.phase));
  return du * du + dv * dv <= radius * radius;
}

bool wrinkle_covers(const Defect& d, double u, double v) {
  const double du = u - d.u, dv = v - d.v;
  if (du * du + dv * dv > d.size * d.size) return false;
  const double along = du * std::cos(d.angle) + dv * std::sin(d.angle);
  const double period = d.size * 0.5;
  return std::sin(2.0 * kPi * along / period + d.phase) > 0.2;
}

Defect sample_defect(DefectKind kind, Rng& rng, const KernelAppearance& app) {
  Defect d;
  d.kind = kind;
  const double theta = rng.uniform(0.0, 2.0 * kPi);
  switch (kind) {
    case DefectKind::kDarkBlotch: {
      const double r = rng.uniform(0.0, 0.25);
      d.u = r * std::cos(theta);
      d.v = r * std::sin(theta);
      d.size = rng.uniform(0.2, 0.35);
      d.phase = rng.uniform(0.0, 2.0 * kPi);
      if (rng.chance(0.5)) {
        d.color = hsv_to_rgb(rng.uniform(95.0, 130.0), rng.uniform(0.5, 0.7),
                             rng.uniform(0.35, 0.5));
      } else {
        d.color = hsv_to_rgb(rng.uniform(20.0, 40.0), rng.uniform(0.2, 0.5),
                             rng.uniform(0.06, 0.16));
      }
      break;
    }
    case DefectKind::kWrinkle: {
      const double r = rng.uniform(0.0, 0.2);
      d.u = r * std::cos(theta);
      d.v = r * std::sin(theta);
      d.size = rng.uniform(0.35, 0.55);
      d.angle = rng.uniform(0.0, kPi);
      d.phase = rng.uniform(0.0, 2.0 * kPi);
      d.color = hsv_to_rgb(rng.uniform(25.0, 35.0), rng.uniform(0.65, 0.75),
                           rng.uniform(0.3, 0.4));
      break;
    }
    case DefectKind::kCrack: {
      d.u = std::cos(theta);
      d.v = std::sin(theta);
      d.size = rng.uniform(0.5, 0.75);
      d.angle = rng.uniform(-0.35, 0.35);
      d.width = std::max(2.0, 0.14 * app.semi_minor);
      d.color = hsv_to_rgb(rng.uniform(15.0, 30.0), rng.uniform(0.4, 0.6),
                           rng.uniform(0.1, 0.2));
      break;
    }
    case DefectKind::kMissingChunk: {
      d.u = std::cos(theta);
      d.v = std::sin(theta);
      d.size = rng.uniform(0.3, 0.5);
      // Exposed fracture face around the bite.
      d.width = std::max(2.0, 0.18 * app.semi_minor);
      d.color = hsv_to_rgb(rng.uniform(20.0, 35.0), rng.uniform(0.45, 0.65),
                           rng.uniform(0.18, 0.3));
      break;
    }
  }
  d.size = std::min(d.size, kind == DefectKind::kDarkBlotch
                                ? (kInteriorReach - std::hypot(d.u, d.v)) / 1.3
                            : kind == DefectKind::kWrinkle
                                ? kInteriorReach - std::hypot(d.u, d.v)
                                : d.size);
  return d;
}

// Grows every defect by `factor`, respecting the interior reach limits.
void grow_defects(KernelAppearance& app, double factor) {
  for (Defect& d : app.defects) {
    switch (d.kind) {
      case DefectKind::kDarkBlotch:
        d.size = std::min(d.size * factor, (kInteriorReach - std::hypot(d.u, d.v)) / 1.3);
        break;
      case DefectKind::kWrinkle:
        d.size = std::min(d.size * factor, kInteriorReach - std::hypot(d.u, d.v));
        break;
      case DefectKind::kCrack:
        d.size = std::min(d.size * factor, 0.85);
        d.width *= factor;
        break;
      case DefectKind::kMissingChunk:
        d.size = std::min(d.size * factor, 0.7);
        break;
    }
  }
}

bool is_edge_defect(DefectKind kind) {
  return kind == DefectKind::kCrack || kind == DefectKind::kMissingChunk;
}

std::string file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "k%05zu.png", index + 1);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'" +
                  (ec ? ": " + ec.message() : std::string()));
  }
}

}  // namespace

std::string_view defect_name(DefectKind kind) noexcept {
  switch (kind) {
    case DefectKind::kCrack:
      return "crack";
    case DefectKind::kMissingChunk:
      return "missing-chunk";
    case DefectKind::kWrinkle:
      return "wrinkle-texture";
    case DefectKind::kDarkBlotch:
      return "dark-blotch";
  }
  return "";
}

void validate(const GeneratorOptions& options) {
  if (!(options.defect_area_fraction >= 0.02 && options.defect_area_fraction <= 0.25)) {
    throw ValidationError("defect_area_fraction must be in [0.02, 0.25]");
  }
}

KernelAppearance sample_appearance(KernelLabel label, std::uint64_t seed, std::size_t width,
                                   std::size_t height, const GeneratorOptions& options,
                                   bool jitter_center) {
  validate(options);
  Rng rng(seed);
  KernelAppearance app;
  const double side = static_cast<double>(std::min(width, height));
  app.semi_major = rng.uniform(0.4, 0.8) * side / 2.0;
  app.semi_minor = app.semi_major * rng.uniform(0.6, 0.8);
  app.angle = rng.uniform(0.0, kPi);
  const double slack = std::max(0.0, side / 2.0 - app.semi_major - 2.0);
  const double jx = rng.uniform(-slack, slack), jy = rng.uniform(-slack, slack);
  app.center_x = static_cast<double>(width) / 2.0 + (jitter_center ? jx : 0.0);
  app.center_y = static_cast<double>(height) / 2.0 + (jitter_center ? jy : 0.0);

  app.base = hsv_to_rgb(rng.uniform(38.0, 50.0), rng.uniform(0.72, 0.92),
                        rng.uniform(0.85, 0.97));
  app.tip = hsv_to_rgb(rng.uniform(42.0, 50.0), rng.uniform(0.05, 0.12),
                       rng.uniform(0.93, 0.98));
  app.tip_start = rng.uniform(0.55, 0.7);
  app.gloss_u = rng.uniform(-0.2, 0.4);
  app.gloss_v = rng.uniform(-0.4, 0.4);
  app.gloss_radius = rng.uniform(0.15, 0.3);
  app.gloss_strength = rng.uniform(0.25, 0.5);

  if (label == KernelLabel::kAbnormal) {
    std::vector<DefectKind> pool{DefectKind::kCrack, DefectKind::kMissingChunk,
                                 DefectKind::kWrinkle, DefectKind::kDarkBlotch};
    const std::size_t wanted = rng.chance(0.35) ? 2 : 1;
    std::vector<DefectKind> chosen;
    while (chosen.size() < wanted) {
      const DefectKind kind = pool[rng.below(pool.size())];
      if (std::find(chosen.begin(), chosen.end(), kind) != chosen.end()) continue;
      // At most one defect may touch the rim.
      if (is_edge_defect(kind) &&
          std::any_of(chosen.begin(), chosen.end(), is_edge_defect)) {
        continue;
      }
      chosen.push_back(kind);
    }
    // Missing chunks are painted first so they take precedence.
    std::stable_sort(chosen.begin(), chosen.end(), [](DefectKind a, DefectKind b) {
      return a == DefectKind::kMissingChunk && b != DefectKind::kMissingChunk;
    });
    for (DefectKind kind : chosen) app.defects.push_back(sample_defect(kind, rng, app));
  }
  return app;
}

KernelRender render_kernel(const KernelAppearance& app, std::size_t width,
                           std::size_t height, const GeneratorOptions& options) {
  const Rgb background{options.background, options.background, options.background};
  KernelRender out;
  out.image = Image(width, height, background);
  out.ellipse_mask.assign(width * height, 0);
  out.kernel_mask.assign(width * height, 0);
  out.defect_mask.assign(width * height, 0);
  out.defect_areas.assign(app.defects.size(), 0);
  out.appearance = app;

  const Frame frame(app);
  std::vector<Segment> cracks(app.defects.size());
  for (std::size_t i = 0; i < app.defects.size(); ++i) {
    if (app.defects[i].kind == DefectKind::kCrack) cracks[i] = crack_segment(app.defects[i], frame);
  }
  std::vector<std::pair<double, double>> bite_centers(app.defects.size());
  for (std::size_t i = 0; i < app.defects.size(); ++i) {
    const Defect& d = app.defects[i];
    if (d.kind == DefectKind::kMissingChunk) {
      frame.to_pixel(d.u, d.v, bite_centers[i].first, bite_centers[i].second);
    }
  }

  const Color base = to_color(app.base), tip = to_color(app.tip);
  const Color white{255.0, 255.0, 255.0};
  const double reach = app.semi_major + 2.0;
  const auto x_lo = static_cast<std::size_t>(std::max(0.0, std::floor(app.center_x - reach)));
  const auto y_lo = static_cast<std::size_t>(std::max(0.0, std::floor(app.center_y - reach)));
  const auto x_hi = std::min(width, static_cast<std::size_t>(std::max(0.0, app.center_x + reach)) + 1);
  const auto y_hi = std::min(height, static_cast<std::size_t>(std::max(0.0, app.center_y + reach)) + 1);

  for (std::size_t y = y_lo; y < y_hi; ++y) {
    for (std::size_t x = x_lo; x < x_hi; ++x) {
      const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
      double u, v;
      frame.to_local(px, py, u, v);
      const double r2 = u * u + v * v;
      if (r2 > 1.0) continue;
      const std::size_t idx = y * width + x;
      out.ellipse_mask[idx] = 1;

      int owner = -1;
      bool missing = false;
      for (std::size_t i = 0; i < app.defects.size() && owner < 0; ++i) {
        const Defect& d = app.defects[i];
        bool hit = false;
        switch (d.kind) {
          case DefectKind::kDarkBlotch:
            hit = blotch_covers(d, u, v);
            break;
          case DefectKind::kWrinkle:
            hit = wrinkle_covers(d, u, v);
            break;
          case DefectKind::kCrack:
            hit = cracks[i].covers(px, py);
            break;
          case DefectKind::kMissingChunk: {
            const double ex = px - bite_centers[i].first, ey = py - bite_centers[i].second;
            const double radius = d.size * app.semi_minor;
            const double dist2 = ex * ex + ey * ey;
            missing = dist2 <= radius * radius;
            hit = dist2 <= (radius + d.width) * (radius + d.width);
            break;
          }
        }
        if (hit) owner = static_cast<int>(i);
      }

      if (owner >= 0) {
        const Defect& d = app.defects[static_cast<std::size_t>(owner)];
        out.defect_mask[idx] = 1;
        ++out.defect_areas[static_cast<std::size_t>(owner)];
        if (missing) continue;
        out.kernel_mask[idx] = 1;
        out.image.set(x, y, d.color);
        continue;
      }

      Color c = mix(base, tip, smoothstep(app.tip_start, app.tip_start + 0.25, -u));
      const double gu = u - app.gloss_u, gv = v - app.gloss_v;
      const double gloss = app.gloss_strength *
                           std::exp(-(gu * gu + gv * gv) /
                                    (2.0 * app.gloss_radius * app.gloss_radius));
      c = mix(c, white, gloss);
      const double shade = 1.0 - 0.18 * r2;
      c = {c.r * shade, c.g * shade, c.b * shade};
      out.kernel_mask[idx] = 1;
      out.image.set(x, y, to_rgb(c));
    }
  }
  return out;
}

KernelRender generate_kernel_render(KernelLabel label, std::uint64_t seed, std::size_t size,
                                    const GeneratorOptions& options) {
  if (size < 32) {
    throw ValidationError("kernel image size must be >= 32, got " + std::to_string(size));
  }
  KernelAppearance app = sample_appearance(label, seed, size, size, options);
  KernelRender render = render_kernel(app, size, size, options);
  if (label == KernelLabel::kNormal) return render;

  auto largest_fraction = [](const KernelRender& r) {
    const auto ellipse = static_cast<double>(
        std::count(r.ellipse_mask.begin(), r.ellipse_mask.end(), std::uint8_t{1}));
    const std::size_t largest =
        *std::max_element(r.defect_areas.begin(), r.defect_areas.end());
    return ellipse > 0 ? static_cast<double>(largest) / ellipse : 0.0;
  };
  for (int attempt = 0; attempt < 16; ++attempt) {
    if (largest_fraction(render) >= options.defect_area_fraction) return render;
    grow_defects(app, 1.2);
    render = render_kernel(app, size, size, options);
  }
  if (largest_fraction(render) >= options.defect_area_fraction) return render;

  // Fall back to a single central blotch, which always clears the bar.
  Rng rng(mix_seed(seed, 0xb10c));
  Defect blotch = sample_defect(DefectKind::kDarkBlotch, rng, app);
  blotch.u = blotch.v = 0.0;
  blotch.size = kInteriorReach / 1.3;
  app.defects = {blotch};
  return render_kernel(app, size, size, options);
}

LabeledImage generate_kernel_image(KernelLabel label, std::uint64_t seed, std::size_t size,
                                   const GeneratorOptions& options) {
  KernelRender render = generate_kernel_render(label, seed, size, options);
  return LabeledImage{"", std::move(render.image), label};
}

// ---------------------------------------------------------------------------

std::size_t DatasetCounts::total() const noexcept {
  std::size_t n = 0;
  for (const ClassCounts& c : splits) n += c.total();
  return n;
}

DatasetCounts DatasetCounts::parse(std::string_view text) {
  std::vector<std::size_t> values;
  std::stringstream stream{std::string(text)};
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("counts must be six non-negative integers, got '" +
                            std::string(text) + "'");
    }
    values.push_back(std::stoul(item));
  }
  if (values.size() != 6) {
    throw ValidationError("counts needs 6 values (train normal,abnormal, validate "
                          "normal,abnormal, test normal,abnormal), got '" +
                          std::string(text) + "'");
  }
  DatasetCounts counts;
  for (std::size_t s = 0; s < 3; ++s) counts.splits[s] = {values[2 * s], values[2 * s + 1]};
  return counts;
}

DatasetCounts DatasetCounts::standard() {
  DatasetCounts counts;
  counts.splits = {ClassCounts{500, 500}, ClassCounts{300, 300}, ClassCounts{100, 100}};
  return counts;
}

std::vector<GeneratedFile> generate_dataset(const DatasetCounts& counts, std::uint64_t seed,
                                            const fs::path& out_dir, std::size_t size,
                                            const GeneratorOptions& options) {
  validate(options);
  if (size < 32) {
    throw ValidationError("kernel image size must be >= 32, got " + std::to_string(size));
  }
  std::vector<GeneratedFile> files;
  for (SplitKind split : kAllSplits) {
    const ClassCounts& c = counts.splits[static_cast<std::size_t>(split)];
    for (KernelLabel label : {KernelLabel::kNormal, KernelLabel::kAbnormal}) {
      ensure_directory(out_dir / split_dir_name(split) / class_dir_name(label));
      const std::size_t n = label == KernelLabel::kNormal ? c.normal : c.abnormal;
      for (std::size_t i = 0; i < n; ++i) {
        files.push_back({file_name(files.size()), split, label, {}});
      }
    }
  }

  std::vector<std::exception_ptr> failures(files.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < static_cast<long>(files.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    GeneratedFile& file = files[k];
    try {
      KernelRender render = generate_kernel_render(file.label, mix_seed(seed, k), size, options);
      for (const Defect& d : render.appearance.defects) file.defects.push_back(d.kind);
      write_png(render.image, out_dir / split_dir_name(file.split) /
                                  class_dir_name(file.label) / file.identifier);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const std::exception_ptr& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  const fs::path manifest_path = out_dir / "manifest.jsonl";
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::trunc);
  if (!manifest) throw IoError("cannot open '" + manifest_path.string() + "' for writing");
  for (const GeneratedFile& file : files) {
    json defects = json::array();
    for (DefectKind d : file.defects) defects.push_back(defect_name(d));
    json record = {
        {"id", file.identifier},
        {"split", split_dir_name(file.split)},
        {"label", label_name(file.label)},
        {"path", std::string(split_dir_name(file.split)) + "/" +
                     std::string(class_dir_name(file.label)) + "/" + file.identifier},
        {"defects", defects},
    };
    manifest << record.dump() << '\n';
  }
  if (!manifest) throw IoError("failed writing '" + manifest_path.string() + "'");
  return files;
}

// ---------------------------------------------------------------------------

SceneSpec scene_spec_with_counts(std::size_t normal, std::size_t abnormal,
                                 std::uint64_t seed) {
  SceneSpec spec;
  spec.labels.assign(normal, KernelLabel::kNormal);
  spec.labels.insert(spec.labels.end(), abnormal, KernelLabel::kAbnormal);
  Rng rng(mix_seed(seed, 0x5ce9e));
  for (std::size_t i = spec.labels.size(); i > 1; --i) {
    std::swap(spec.labels[i - 1], spec.labels[rng.below(i)]);
  }
  return spec;
}

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed,
                     const GeneratorOptions& options) {
  validate(options);
  if (spec.kernel_canvas < 32) throw ValidationError("scene kernel_canvas must be >= 32");
  if (spec.width < spec.kernel_canvas || spec.height < spec.kernel_canvas) {
    throw CapacityError("scene " + std::to_string(spec.width) + "x" +
                        std::to_string(spec.height) + " is smaller than one kernel canvas (" +
                        std::to_string(spec.kernel_canvas) + "); use a larger canvas");
  }
  const Rgb background{options.background, options.background, options.background};
  Scene scene;
  scene.image = Image(spec.width, spec.height, background);
  scene.kernel_mask.assign(spec.width * spec.height, 0);

  const std::size_t kc = spec.kernel_canvas;
  Rng placer(mix_seed(seed, 0));
  constexpr int kMaxAttempts = 10000;
  int attempts = 0;
  for (std::size_t i = 0; i < spec.labels.size(); ++i) {
    const KernelLabel label = spec.labels[i];
    KernelRender render = generate_kernel_render(label, mix_seed(seed, 1000 + i), kc, options);
    // The kernel-local canvas is centered on the ellipse.
    const KernelAppearance& app = render.appearance;
    const double radius = app.semi_major + 1.0;
    const double local_cx = app.center_x, local_cy = app.center_y;

    bool placed = false;
    std::size_t ox = 0, oy = 0;
    while (!placed) {
      if (++attempts > kMaxAttempts) {
        throw CapacityError("could not place " + std::to_string(spec.labels.size()) +
                            " kernels without overlap in a " + std::to_string(spec.width) +
                            "x" + std::to_string(spec.height) +
                            " scene after 10000 attempts; use a larger canvas");
      }
      ox = placer.below(spec.width - kc + 1);
      oy = placer.below(spec.height - kc + 1);
      const double cx = static_cast<double>(ox) + local_cx;
      const double cy = static_cast<double>(oy) + local_cy;
      placed = std::all_of(scene.kernels.begin(), scene.kernels.end(), [&](const SceneKernel& k) {
        return std::hypot(cx - k.center_x, cy - k.center_y) >=
               radius + k.radius + static_cast<double>(spec.margin);
      });
    }

    std::size_t x0 = spec.width, y0 = spec.height, x1 = 0, y1 = 0;
    for (std::size_t y = 0; y < kc; ++y) {
      for (std::size_t x = 0; x < kc; ++x) {
        if (!render.kernel_mask[y * kc + x]) continue;
        const std::size_t sx = ox + x, sy = oy + y;
        scene.image.set(sx, sy, render.image.get(x, y));
        scene.kernel_mask[sy * spec.width + sx] = 1;
        x0 = std::min(x0, sx);
        y0 = std::min(y0, sy);
        x1 = std::max(x1, sx);
        y1 = std::max(y1, sy);
      }
    }
    SceneKernel kernel;
    kernel.box = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    kernel.label = label;
    kernel.center_x = static_cast<double>(ox) + local_cx;
    kernel.center_y = static_cast<double>(oy) + local_cy;
    kernel.radius = radius;
    scene.kernels.push_back(kernel);
  }
  return scene;
}

void write_scene(const Scene& scene, const fs::path& image_path,
                 const fs::path& manifest_path) {
  write_png(scene.image, image_path);
  json kernels = json::array();
  for (std::size_t i = 0; i < scene.kernels.size(); ++i) {
    const SceneKernel& k = scene.kernels[i];
    kernels.push_back({{"id", "Z-" + std::to_string(i + 1)},
                       {"label", label_name(k.label)},
                       {"box", {k.box.x, k.box.y, k.box.width, k.box.height}}});
  }
  json record = {{"id", image_path.filename().string()},
                 {"width", scene.image.width},
                 {"height", scene.image.height},
                 {"kernels", kernels}};
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + manifest_path.string() + "' for writing");
  out << record.dump() << '\n';
  if (!out) throw IoError("failed writing '" + manifest_path.string() + "'");
}

}  // namespace seedscan
