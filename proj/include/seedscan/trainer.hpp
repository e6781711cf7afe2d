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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedscan/data.hpp"
#include "seedscan/model.hpp"
#include "seedscan/report.hpp"

namespace seedscan {

/// Per-epoch training curve point. Epochs are numbered from 1.
struct MetricsRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AugmentationConfig augmentation;  // applied to training batches only
  std::uint64_t seed = 42;          // drives shuffling
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;

  /// ConfigError for a non-positive learning rate or batch size.
  void validate() const;
};

struct TrainResult {
  ModelParameters final_params;
  /// Parameters after the epoch with the best validation accuracy (earliest on
  /// ties); the freshly built model when epochs == 0.
  ModelParameters best_params;
  std::size_t best_epoch = 0;
  std::vector<MetricsRecord> metrics;
};

using EpochCallback = std::function<void(const MetricsRecord&)>;

/// Trains on splits.train, validating on splits.validate after every epoch.
/// Deterministic in (config.model.seed, config.seed, augmentation seed).
TrainResult train(const DatasetSplit& splits, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Same, on already preprocessed sets. Augmentation needs the raw images, so
/// it is rejected here.
TrainResult train_prepared(const PreparedSet& train_set, const PreparedSet& validate_set,
                           const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  Report report;  // kind "evaluation"; one row per image with actual label
};

Evaluation evaluate(const ModelParameters& params, const std::vector<LabeledImage>& images,
                    const ModelConfig& config);
Evaluation evaluate_prepared(const ModelParameters& params, const PreparedSet& set);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ModelParameters params;
  std::optional<MetricsRecord> final_metrics;
  std::uint64_t seed = 0;
  std::size_t selected_epoch = 0;  // epoch whose parameters were stored
  // Training settings, kept for provenance.
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  std::size_t batch_size = 0;
  std::string optimizer;
  std::string augmentation;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Checkpoint of a finished run: the best-validation parameters plus the
/// settings that produced them.
Checkpoint make_checkpoint(const TrainConfig& config, const TrainResult& result);

/// "GSCK", u16 version, u32-prefixed JSON header, per-parameter name, shape and
/// little-endian f64 values, then a CRC-32 of every preceding byte.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
/// VersionError for another format version; IntegrityError for truncated,
/// corrupt or inconsistent bytes.
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Metrics CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kMetricsHeader =
    "epoch,train_loss,train_accuracy,val_loss,val_accuracy";

std::string format_metrics(std::span<const MetricsRecord> records);
/// ValidationError when `records` is empty.
void export_metrics(std::span<const MetricsRecord> records, const std::filesystem::path& path);
std::vector<MetricsRecord> parse_metrics(const std::string& text);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);

}  // namespace seedscan
