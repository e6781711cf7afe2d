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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seedscan/image.hpp"
#include "seedscan/model.hpp"

namespace seedscan {

/// One classified kernel, as listed in evaluation and inspection reports.
struct ReportRow {
  std::string identifier;
  std::optional<KernelLabel> actual;  // known for evaluation, absent for scenes
  double probability = 0.0;           // raw sigmoid output
  KernelLabel predict = KernelLabel::kAbnormal;
  std::optional<BoundingBox> box;     // scene rows only

  /// Sigmoid output rounded to 3 decimals, for display.
  double calculation() const noexcept;
};

ReportRow make_row(std::string identifier, double probability);

/// "0.857"
std::string format_calculation(double probability);

struct Report {
  std::string kind;  // "evaluation" or "inspection"
  std::vector<ReportRow> rows;
  std::optional<double> loss;
  std::optional<double> accuracy;  // evaluation only: matches over rows

  std::size_t normal_count() const noexcept;
  std::size_t abnormal_count() const noexcept;

  /// Structured text: {"kind", "rows": [...], "totals": {...}, ...}.
  std::string to_json() const;
  static Report from_json(const std::string& text);
};

void write_report(const Report& report, const std::filesystem::path& path);
Report read_report(const std::filesystem::path& path);

}  // namespace seedscan
