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

#include "seedscan/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seedscan/errors.hpp"

namespace seedscan {

using nlohmann::json;

double ReportRow::calculation() const noexcept {
  return std::round(probability * 1000.0) / 1000.0;
}

ReportRow make_row(std::string identifier, double probability) {
  ReportRow row;
  row.identifier = std::move(identifier);
  row.probability = probability;
  row.predict = classify(probability);
  return row;
}

std::string format_calculation(double probability) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", probability);
  return buf;
}

std::size_t Report::normal_count() const noexcept {
  std::size_t n = 0;
  for (const ReportRow& row : rows) n += row.predict == KernelLabel::kNormal;
  return n;
}

std::size_t Report::abnormal_count() const noexcept {
  return rows.size() - normal_count();
}

std::string Report::to_json() const {
  json out;
  out["kind"] = kind;
  json rows_json = json::array();
  for (const ReportRow& row : rows) {
    json r;
    r["id"] = row.identifier;
    if (row.actual) r["actual"] = label_name(*row.actual);
    r["calculation"] = row.calculation();
    r["probability"] = row.probability;
    r["predict"] = label_name(row.predict);
    if (row.box) r["box"] = {row.box->x, row.box->y, row.box->width, row.box->height};
    rows_json.push_back(std::move(r));
  }
  out["rows"] = std::move(rows_json);
  out["totals"] = {{"total", rows.size()},
                   {"normal", normal_count()},
                   {"abnormal", abnormal_count()}};
  if (loss) out["loss"] = *loss;
  if (accuracy) out["accuracy"] = *accuracy;
  return out.dump(2) + "\n";
}

Report Report::from_json(const std::string& text) {
  Report report;
  try {
    const json in = json::parse(text);
    report.kind = in.at("kind").get<std::string>();
    for (const json& r : in.at("rows")) {
      ReportRow row;
      row.identifier = r.at("id").get<std::string>();
      if (r.contains("actual")) row.actual = parse_label(r.at("actual").get<std::string>());
      row.probability = r.at("probability").get<double>();
      row.predict = parse_label(r.at("predict").get<std::string>());
      if (r.contains("box")) {
        const auto b = r.at("box").get<std::vector<std::size_t>>();
        if (b.size() != 4) throw ValidationError("report box needs 4 values");
        row.box = BoundingBox{b[0], b[1], b[2], b[3]};
      }
      report.rows.push_back(std::move(row));
    }
    if (in.contains("loss")) report.loss = in.at("loss").get<double>();
    if (in.contains("accuracy")) report.accuracy = in.at("accuracy").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return report;
}

void write_report(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << report.to_json();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Report read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return Report::from_json(text.str());
}

}  // namespace seedscan
