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

#include <gtest/gtest.h>
#include <omp.h>

#include <fstream>
#include <iterator>

#include "seedscan/errors.hpp"
#include "seedscan/rng.hpp"
#include "seedscan/synth.hpp"
#include "seedscan/trainer.hpp"
#include "test_util.hpp"

namespace seedscan {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::vector<LabeledImage> kernels(std::size_t normal, std::size_t abnormal, std::uint64_t seed,
                                  std::size_t size = 48) {
  std::vector<LabeledImage> out;
  for (std::size_t i = 0; i < normal + abnormal; ++i) {
    const KernelLabel label = i < normal ? KernelLabel::kNormal : KernelLabel::kAbnormal;
    LabeledImage img = generate_kernel_image(label, mix_seed(seed, i), size);
    img.identifier = "img" + std::to_string(i) + ".png";
    out.push_back(std::move(img));
  }
  return out;
}

TrainConfig small_config(std::size_t epochs) {
  TrainConfig config;
  config.model.input_height = config.model.input_width = 16;
  config.model.filters = {4, 8, 8};
  config.model.dense_width = 8;
  config.epochs = epochs;
  config.batch_size = 4;
  config.seed = 11;
  return config;
}

DatasetSplit small_split() {
  DatasetSplit split;
  split.train = kernels(6, 6, 1);
  split.validate = kernels(3, 3, 2);
  split.test = kernels(2, 2, 3);
  return split;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Train, ZeroEpochsReturnsTheFreshModel) {
  const TrainConfig config = small_config(0);
  const TrainResult r = train(small_split(), config);
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_EQ(r.final_params, build_model(config.model));
  EXPECT_EQ(r.best_params, build_model(config.model));
}

TEST(Train, EmptySplitsAndBadConfigAreRejected) {
  DatasetSplit split = small_split();
  split.validate.clear();
  EXPECT_THROW(train(split, small_config(1)), ValidationError);
  split = small_split();
  split.train.clear();
  EXPECT_THROW(train(split, small_config(1)), ValidationError);
  TrainConfig bad = small_config(1);
  bad.learning_rate = 0.0;
  EXPECT_THROW(train(small_split(), bad), ValidationError);
  bad = small_config(1);
  bad.batch_size = 0;
  EXPECT_THROW(train(small_split(), bad), ValidationError);
}

TEST(Train, OneRecordPerEpochAndCallbackSeesThemAll) {
  std::vector<MetricsRecord> seen;
  const TrainResult r =
      train(small_split(), small_config(3), [&](const MetricsRecord& m) { seen.push_back(m); });
  ASSERT_EQ(r.metrics.size(), 3u);
  EXPECT_EQ(seen, r.metrics);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.metrics[i].epoch, i + 1);
    EXPECT_GE(r.metrics[i].train_accuracy, 0.0);
    EXPECT_LE(r.metrics[i].val_accuracy, 1.0);
  }
  // Best epoch: highest validation accuracy, earliest on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (r.metrics[i].val_accuracy > r.metrics[best].val_accuracy) best = i;
  }
  EXPECT_EQ(r.best_epoch, best + 1);
}

TEST(Train, IdenticalConfigIsDeterministicAcrossThreadCounts) {
  const int saved = omp_get_max_threads();
  TrainConfig config = small_config(2);
  config.augmentation.horizontal_flip = true;
  config.augmentation.rotate90 = true;
  config.augmentation.brightness = 0.1;
  config.augmentation.seed = 5;
  omp_set_num_threads(1);
  const TrainResult a = train(small_split(), config);
  omp_set_num_threads(3);
  const TrainResult b = train(small_split(), config);
  omp_set_num_threads(saved);
  EXPECT_EQ(a.metrics, b.metrics);
  EXPECT_EQ(a.final_params, b.final_params);
  config.seed = 12;
  EXPECT_NE(train(small_split(), config).final_params, a.final_params);
}

TEST(Train, AdamMemorizesSixteenImages) {
  TrainConfig config = small_config(200);
  config.model.input_height = config.model.input_width = 32;
  config.model.filters = {8, 16, 16};
  config.model.dense_width = 16;
  DatasetSplit split;
  split.train = kernels(8, 8, 99, 64);
  split.validate = split.train;
  std::size_t epochs = 0;
  double last_accuracy = 0.0;
  const PreparedSet set = prepare(split.train, 32, 32);
  // Stop early once memorized; the trainer itself runs the full schedule.
  for (std::size_t e : {25u, 50u, 100u, 200u}) {
    config.epochs = e;
    const TrainResult r = train_prepared(set, set, config);
    last_accuracy = r.metrics.back().train_accuracy;
    epochs = e;
    if (last_accuracy == 1.0) break;
  }
  EXPECT_EQ(last_accuracy, 1.0) << "after " << epochs << " epochs";
}

TEST(Evaluate, RowsAreConsistentWithAccuracy) {
  const TrainConfig config = small_config(1);
  const ModelParameters params = build_model(config.model);
  const auto images = kernels(3, 4, 8);
  const Evaluation a = evaluate(params, images, config.model);
  const Evaluation b = evaluate(params, images, config.model);
  ASSERT_EQ(a.report.rows.size(), 7u);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    const ReportRow& row = a.report.rows[i];
    EXPECT_EQ(row.identifier, images[i].identifier);
    EXPECT_EQ(*row.actual, images[i].label);
    EXPECT_EQ(row.predict, classify(row.probability));
    correct += row.predict == *row.actual;
  }
  EXPECT_EQ(a.accuracy, static_cast<double>(correct) / 7.0);
  EXPECT_EQ(a.report.accuracy, a.accuracy);
  EXPECT_EQ(a.report.to_json(), b.report.to_json());
  EXPECT_EQ(a.loss, b.loss);

  const Evaluation one = evaluate(params, {images[0]}, config.model);
  EXPECT_TRUE(one.accuracy == 0.0 || one.accuracy == 1.0);
  EXPECT_THROW(evaluate(params, {}, config.model), ValidationError);
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config = small_config(1).model;
  c.params = build_model(c.config);
  c.final_metrics = MetricsRecord{3, 0.25, 0.875, 0.5, 0.75};
  c.seed = 11;
  c.selected_epoch = 2;
  c.epochs = 3;
  c.learning_rate = 1e-3;
  c.batch_size = 4;
  c.optimizer = "adam";
  c.augmentation = "none";
  return c;
}

TEST(CheckpointFile, RoundTripIsBitExact) {
  TempDir dir("ckpt");
  const Checkpoint c = sample_checkpoint();
  save_checkpoint(c, dir.path() / "m.ckpt");
  const Checkpoint back = load_checkpoint(dir.path() / "m.ckpt");
  EXPECT_EQ(back, c);
  const Tensor probe = testing::random_tensor({2, 3, 16, 16}, 4, 0.0, 1.0);
  const Tensor p1 = forward(c.params, probe).probabilities;
  const Tensor p2 = forward(back.params, probe).probabilities;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(p1[i]), std::bit_cast<std::uint64_t>(p2[i]));
  }
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(c));
  const auto bytes = serialize_checkpoint(c);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GSCK");
}

TEST(CheckpointFile, TruncationAndBitFlipsAreIntegrityErrors) {
  const auto bytes = serialize_checkpoint(sample_checkpoint());
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_checkpoint(std::span(bytes.data(), keep)), IntegrityError) << keep;
  }
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(deserialize_checkpoint(flipped), IntegrityError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(magic), IntegrityError);
}

TEST(CheckpointFile, VersionBumpNamesBothVersions) {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  bytes[4] = 2;
  try {
    deserialize_checkpoint(bytes);
    FAIL() << "expected VersionError";
  } catch (const IntegrityError&) {
    FAIL() << "version bump reported as corruption";
  } catch (const VersionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("version 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("version 1"), std::string::npos) << msg;
  }
}

TEST(CheckpointFile, MissingFileIsIoErrorNamingThePath) {
  TempDir dir("ckpt_missing");
  try {
    load_checkpoint(dir.path() / "nope.ckpt");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.ckpt"), std::string::npos);
  }
}

TEST(Metrics, ExportParseAndDeterminism) {
  const std::vector<MetricsRecord> records{
      {1, 0.693147, 0.5, 0.681234, 0.55},
      {2, 0.412345, 0.8125, 0.398765, 0.8},
      {3, 0.123456, 0.9375, 0.234567, 0.9},
  };
  TempDir dir("metrics");
  export_metrics(records, dir.path() / "a.csv");
  export_metrics(records, dir.path() / "b.csv");
  const std::string text = slurp(dir.path() / "a.csv");
  EXPECT_EQ(text, slurp(dir.path() / "b.csv"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(text.substr(0, text.find('\n')), kMetricsHeader);
  EXPECT_NE(text.find("\n1,0.693147,0.500000,0.681234,0.550000\n"), std::string::npos);
  EXPECT_EQ(read_metrics(dir.path() / "a.csv"), records);
  EXPECT_THROW(export_metrics({}, dir.path() / "c.csv"), ValidationError);
  EXPECT_THROW(parse_metrics("nope\n"), ValidationError);
  EXPECT_THROW(export_metrics(records, dir.path() / "missing" / "x" / "c.csv"), IoError);
}

}  // namespace
}  // namespace seedscan
