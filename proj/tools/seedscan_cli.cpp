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

// Command-line front end: generate data, train, evaluate, predict, inspect.
//
// Exit codes: 0 success, 1 usage, 2 invalid data, 3 I/O.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "seedscan/data.hpp"
#include "seedscan/detect.hpp"
#include "seedscan/errors.hpp"
#include "seedscan/image.hpp"
#include "seedscan/model.hpp"
#include "seedscan/report.hpp"
#include "seedscan/rng.hpp"
#include "seedscan/synth.hpp"
#include "seedscan/trainer.hpp"

namespace fs = std::filesystem;
using namespace seedscan;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

struct Options {
  std::string out;
  std::string counts = "500,500,300,300,100,100";
  std::uint64_t seed = 0;
  std::size_t size = 0;
  std::string scene;
  std::string data;
  std::string model = "model.ckpt";
  std::size_t epochs = 30;
  double lr = 1e-3;
  std::size_t batch = 32;
  std::string optimizer = "adam";
  std::string augment = "none";
  std::string image;
  std::string report;
  std::size_t min_area = 64;
};

ModelConfig config_for_size(std::size_t size, std::uint64_t seed) {
  ModelConfig config;
  config.input_height = size;
  config.input_width = size;
  config.seed = seed;
  config.validate();
  return config;
}

int run_generate(const Options& o) {
  if (!o.scene.empty()) {
    const DatasetCounts parsed = DatasetCounts::parse(o.scene + ",0,0,0,0");
    const ClassCounts c = parsed.splits[0];
    const Scene scene = generate_scene(scene_spec_with_counts(c.normal, c.abnormal, o.seed),
                                       o.seed);
    fs::path image = o.out;
    if (image.extension() != ".png") image /= "scene.png";
    if (image.has_parent_path()) fs::create_directories(image.parent_path());
    fs::path manifest = image;
    manifest.replace_extension(".jsonl");
    write_scene(scene, image, manifest);
    std::printf("generated scene=%s kernels=%zu normal=%zu abnormal=%zu manifest=%s\n",
                image.c_str(), scene.kernels.size(), c.normal, c.abnormal, manifest.c_str());
    return 0;
  }
  const DatasetCounts counts = DatasetCounts::parse(o.counts);
  const auto files = generate_dataset(counts, o.seed, o.out, o.size == 0 ? 250 : o.size);
  std::printf("generated files=%zu out=%s seed=%llu\n", files.size(), o.out.c_str(),
              static_cast<unsigned long long>(o.seed));
  return 0;
}

int run_train(const Options& o) {
  TrainConfig config;
  config.model = config_for_size(o.size == 0 ? 64 : o.size, o.seed);
  config.epochs = o.epochs;
  config.learning_rate = o.lr;
  config.batch_size = o.batch;
  config.optimizer = parse_optimizer(o.optimizer);
  config.augmentation = parse_augmentation(o.augment);
  config.augmentation.seed = mix_seed(o.seed, 0xa0a0);
  config.seed = o.seed;
  config.checkpoint_path = o.model;
  config.metrics_path = o.report.empty() ? fs::path(o.model).replace_extension(".csv")
                                         : fs::path(o.report);
  config.validate();

  const DatasetSplit splits = load_dataset(o.data);
  const auto started = std::chrono::steady_clock::now();
  const TrainResult result = train(splits, config, [&](const MetricsRecord& r) {
    std::fprintf(stderr,
                 "epoch %zu/%zu train_loss=%.4f train_acc=%.4f val_loss=%.4f val_acc=%.4f\n",
                 r.epoch, config.epochs, r.train_loss, r.train_accuracy, r.val_loss,
                 r.val_accuracy);
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const Checkpoint checkpoint = make_checkpoint(config, result);
  if (config.checkpoint_path.has_parent_path()) {
    fs::create_directories(config.checkpoint_path.parent_path());
  }
  save_checkpoint(checkpoint, config.checkpoint_path);
  if (!result.metrics.empty()) export_metrics(result.metrics, config.metrics_path);

  const double val_acc = result.metrics.empty() ? 0.0 : result.metrics.back().val_accuracy;
  std::printf("trained epochs=%zu best_epoch=%zu val_accuracy=%.4f seconds=%.1f model=%s "
              "metrics=%s\n",
              config.epochs, result.best_epoch, val_acc, seconds,
              config.checkpoint_path.c_str(),
              result.metrics.empty() ? "none" : config.metrics_path.c_str());
  return 0;
}

int run_eval(const Options& o) {
  const Checkpoint checkpoint = load_checkpoint(o.model);
  std::vector<LabeledImage> images;
  const fs::path test_dir = fs::path(o.data) / split_dir_name(SplitKind::kTest);
  for (KernelLabel label : {KernelLabel::kNormal, KernelLabel::kAbnormal}) {
    auto part = load_class_directory(test_dir / class_dir_name(label), label);
    images.insert(images.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  }
  std::sort(images.begin(), images.end(), [](const LabeledImage& a, const LabeledImage& b) {
    return a.identifier < b.identifier;
  });
  const Evaluation evaluation = evaluate(checkpoint.params, images, checkpoint.config);
  const fs::path report = o.report.empty() ? fs::path("eval.json") : fs::path(o.report);
  write_report(evaluation.report, report);
  std::printf("accuracy=%.4f loss=%.6f images=%zu report=%s\n", evaluation.accuracy,
              evaluation.loss, images.size(), report.c_str());
  return 0;
}

int run_predict(const Options& o) {
  const Checkpoint checkpoint = load_checkpoint(o.model);
  const Image image = read_image(o.image);
  const ModelConfig& c = checkpoint.config;
  Tensor batch = preprocess(image, c.input_height, c.input_width)
                     .reshaped({1, c.input_channels, c.input_height, c.input_width});
  const ReportRow row = make_row(o.image, predict(checkpoint.params, batch)[0]);
  std::printf("%s %s %s\n", o.image.c_str(), format_calculation(row.probability).c_str(),
              std::string(label_name(row.predict)).c_str());
  return 0;
}

int run_inspect(const Options& o) {
  const Checkpoint checkpoint = load_checkpoint(o.model);
  const Image image = read_image(o.image);
  InspectConfig config;
  config.model = checkpoint.config;
  config.min_area = o.min_area;
  const Inspection inspection = inspect_scene(image, checkpoint.params, config);
  const fs::path annotated = o.out.empty() ? fs::path("annotated.png") : fs::path(o.out);
  const fs::path report = o.report.empty() ? fs::path("inspection.json") : fs::path(o.report);
  write_png(inspection.annotated, annotated);
  write_report(inspection.report, report);
  std::printf("inspected detections=%zu normal=%zu abnormal=%zu annotated=%s report=%s\n",
              inspection.report.rows.size(), inspection.report.normal_count(),
              inspection.report.abnormal_count(), annotated.c_str(), report.c_str());
  return 0;
}

int exit_code_for(const seedscan::Error& e) {
  switch (e.kind()) {
    case ErrorKind::kUsage:
      return kExitUsage;
    case ErrorKind::kValidation:
      return kExitData;
    case ErrorKind::kIo:
      return kExitIo;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seedscan: corn kernel inspection (generate, train, eval, predict, inspect)"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "seedscan 1.0.0");
  Options o;

  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset tree or scene");
  generate->add_option("--out", o.out, "Output directory (or .png path with --scene)")
      ->required();
  generate->add_option("--counts", o.counts,
                       "train normal,abnormal,validate normal,abnormal,test normal,abnormal");
  generate->add_option("--seed", o.seed, "Random seed")->required();
  generate->add_option("--size", o.size, "Image side in pixels (0 = 250)");
  generate->add_option("--scene", o.scene,
                       "Write one multi-kernel scene instead: normal,abnormal");

  auto* train_cmd = app.add_subcommand("train", "Train the classifier on a dataset tree");
  train_cmd->add_option("--data", o.data, "Dataset root")->required();
  train_cmd->add_option("--model", o.model, "Checkpoint to write");
  train_cmd->add_option("--epochs", o.epochs, "Training epochs");
  train_cmd->add_option("--lr", o.lr, "Learning rate");
  train_cmd->add_option("--batch", o.batch, "Batch size");
  train_cmd->add_option("--optimizer", o.optimizer, "adam or sgd")
      ->check(CLI::IsMember({"adam", "sgd"}, CLI::ignore_case));
  train_cmd->add_option("--size", o.size, "Model input side, divisible by 8 (0 = 64)");
  train_cmd->add_option("--augment", o.augment,
                        "none, or a list of hflip,vflip,rot90,brightness=<fraction>");
  train_cmd->add_option("--seed", o.seed, "Random seed (model init and shuffling)")
      ->required();
  train_cmd->add_option("--report", o.report, "Metrics CSV (empty = <model>.csv)");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval_cmd->add_option("--model", o.model, "Checkpoint to load");
  eval_cmd->add_option("--data", o.data, "Dataset root")->required();
  eval_cmd->add_option("--report", o.report, "Report JSON (empty = eval.json)");

  auto* predict_cmd = app.add_subcommand("predict", "Classify one kernel image");
  predict_cmd->add_option("--model", o.model, "Checkpoint to load");
  predict_cmd->add_option("--image", o.image, "PNG or JPEG image")->required();

  auto* inspect_cmd = app.add_subcommand("inspect", "Detect and classify every kernel in a scene");
  inspect_cmd->add_option("--model", o.model, "Checkpoint to load");
  inspect_cmd->add_option("--image", o.image, "Scene image")->required();
  inspect_cmd->add_option("--out", o.out, "Annotated PNG (empty = annotated.png)");
  inspect_cmd->add_option("--report", o.report, "Report JSON (empty = inspection.json)");
  inspect_cmd->add_option("--min-area", o.min_area, "Smallest component kept, in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) return run_generate(o);
    if (*train_cmd) return run_train(o);
    if (*eval_cmd) return run_eval(o);
    if (*predict_cmd) return run_predict(o);
    if (*inspect_cmd) return run_inspect(o);
  } catch (const seedscan::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
