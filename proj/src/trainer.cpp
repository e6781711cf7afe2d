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

#include "seedscan/trainer.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "seedscan/errors.hpp"

namespace seedscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t count_correct(const Tensor& probabilities, const Tensor& targets) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    correct += encode_label(classify(probabilities[i])) == targets[i];
  }
  return correct;
}

// Augmented batch built from raw images in the given order.
Batch augmented_batch(const std::vector<LabeledImage>& images,
                      const std::vector<std::size_t>& indices, std::uint64_t first_draw,
                      const AugmentationConfig& augmentation, const ModelConfig& model) {
  const std::size_t h = model.input_height, w = model.input_width;
  const std::size_t plane = model.input_channels * h * w;
  Batch batch{Tensor({indices.size(), model.input_channels, h, w}), Tensor({indices.size()}),
              indices};
  std::vector<std::exception_ptr> failures(indices.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(indices.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const LabeledImage view = augment(images[indices[k]], augmentation, first_draw + k);
      preprocess_into(view.pixels, h, w, batch.images.raw() + k * plane);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    batch.targets[k] = encode_label(images[indices[k]].label);
  }
  return batch;
}

TrainResult run_training(const PreparedSet& train_set, const std::vector<LabeledImage>* raw,
                         const PreparedSet& validate_set, const TrainConfig& config,
                         const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.size() == 0) throw ValidationError("training split is empty");
  if (validate_set.size() == 0) throw ValidationError("validation split is empty");

  TrainResult result;
  result.final_params = build_model(config.model);
  result.best_params = result.final_params;
  if (config.epochs == 0) return result;

  OptimizerConfig optimizer;
  optimizer.kind = config.optimizer;
  optimizer.learning_rate = config.learning_rate;
  OptimizerState state;
  ModelParameters& params = result.final_params;
  double best_accuracy = -1.0;
  const std::size_t n = train_set.size();
  // Non-owning handle for the iterator.
  const std::shared_ptr<const PreparedSet> shared(std::shared_ptr<void>(), &train_set);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    auto step = [&](const Batch& batch) {
      ForwardResult fr = forward(params, batch.images);
      const LossResult loss = bce_loss(fr.probabilities, batch.targets);
      if (!std::isfinite(loss.loss)) {
        throw ValidationError("training diverged at epoch " + std::to_string(epoch + 1) +
                              "; lower the learning rate");
      }
      loss_sum += loss.loss * static_cast<double>(batch.indices.size());
      correct += count_correct(fr.probabilities, batch.targets);
      const ModelParameters grads = backward(params, fr.cache, loss.grad);
      optimizer_step(params, grads, state, optimizer);
    };

    if (raw && config.augmentation.enabled()) {
      const std::vector<std::size_t> order = epoch_permutation(n, config.seed, epoch);
      for (std::size_t start = 0; start < n; start += config.batch_size) {
        const std::size_t end = std::min(n, start + config.batch_size);
        const std::vector<std::size_t> indices(order.begin() + static_cast<long>(start),
                                               order.begin() + static_cast<long>(end));
        step(augmented_batch(*raw, indices, epoch * n + start, config.augmentation,
                             config.model));
      }
    } else {
      BatchIterator batches(shared, config.batch_size, config.seed, epoch);
      Batch batch;
      while (batches.next(batch)) step(batch);
    }

    const Evaluation validation = evaluate_prepared(params, validate_set);
    MetricsRecord record;
    record.epoch = epoch + 1;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    record.val_loss = validation.loss;
    record.val_accuracy = validation.accuracy;
    result.metrics.push_back(record);
    if (record.val_accuracy > best_accuracy) {
      best_accuracy = record.val_accuracy;
      result.best_params = params;
      result.best_epoch = record.epoch;
    }
    if (on_epoch) on_epoch(record);
  }
  return result;
}

// --- little-endian byte helpers -------------------------------------------

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void put_bytes(std::vector<std::uint8_t>& out, std::string_view bytes) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(bytes.size()));
  out.insert(out.end(), bytes.begin(), bytes.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string get_bytes() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw IntegrityError("checkpoint is truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'G', 'S', 'C', 'K'};

json config_to_json(const ModelConfig& c) {
  return {{"input_height", c.input_height},
          {"input_width", c.input_width},
          {"input_channels", c.input_channels},
          {"filters", c.filters},
          {"kernel_size", c.kernel_size},
          {"dense_width", c.dense_width},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.input_height = j.at("input_height").get<std::size_t>();
  c.input_width = j.at("input_width").get<std::size_t>();
  c.input_channels = j.at("input_channels").get<std::size_t>();
  c.filters = j.at("filters").get<std::array<std::size_t, 3>>();
  c.kernel_size = j.at("kernel_size").get<std::size_t>();
  c.dense_width = j.at("dense_width").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json metrics_to_json(const MetricsRecord& m) {
  return {{"epoch", m.epoch},
          {"train_loss", m.train_loss},
          {"train_accuracy", m.train_accuracy},
          {"val_loss", m.val_loss},
          {"val_accuracy", m.val_accuracy}};
}

MetricsRecord metrics_from_json(const json& j) {
  MetricsRecord m;
  m.epoch = j.at("epoch").get<std::size_t>();
  m.train_loss = j.at("train_loss").get<double>();
  m.train_accuracy = j.at("train_accuracy").get<double>();
  m.val_loss = j.at("val_loss").get<double>();
  m.val_accuracy = j.at("val_accuracy").get<double>();
  return m;
}

std::uint32_t checksum(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks to stay portable.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

// Error messages carry a kind prefix; rewrapping should not repeat it.
std::string without_prefix(std::string_view message, std::string_view prefix) {
  if (message.starts_with(prefix)) message.remove_prefix(prefix.size());
  return std::string(message);
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
}

TrainResult train(const DatasetSplit& splits, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (splits.train.empty()) throw ValidationError("training split is empty");
  if (splits.validate.empty()) throw ValidationError("validation split is empty");
  const PreparedSet train_set =
      prepare(splits.train, config.model.input_height, config.model.input_width);
  const PreparedSet validate_set =
      prepare(splits.validate, config.model.input_height, config.model.input_width);
  return run_training(train_set, &splits.train, validate_set, config, on_epoch);
}

TrainResult train_prepared(const PreparedSet& train_set, const PreparedSet& validate_set,
                           const TrainConfig& config, const EpochCallback& on_epoch) {
  if (config.augmentation.enabled()) {
    throw UsageError("augmentation needs raw images; call train() instead");
  }
  return run_training(train_set, nullptr, validate_set, config, on_epoch);
}

Evaluation evaluate_prepared(const ModelParameters& params, const PreparedSet& set) {
  if (set.size() == 0) throw ValidationError("cannot evaluate an empty image list");
  const Tensor probabilities = predict(params, set.images);
  Tensor targets({set.size()});
  for (std::size_t i = 0; i < set.size(); ++i) targets[i] = encode_label(set.labels[i]);

  Evaluation out;
  out.loss = bce_loss(probabilities, targets).loss;
  out.report.kind = "evaluation";
  std::vector<KernelLabel> predictions;
  for (std::size_t i = 0; i < set.size(); ++i) {
    ReportRow row = make_row(set.identifiers[i], probabilities[i]);
    row.actual = set.labels[i];
    predictions.push_back(row.predict);
    out.report.rows.push_back(std::move(row));
  }
  out.accuracy = accuracy(predictions, set.labels);
  out.report.loss = out.loss;
  out.report.accuracy = out.accuracy;
  return out;
}

Evaluation evaluate(const ModelParameters& params, const std::vector<LabeledImage>& images,
                    const ModelConfig& config) {
  if (images.empty()) throw ValidationError("cannot evaluate an empty image list");
  return evaluate_prepared(params, prepare(images, config.input_height, config.input_width));
}

Checkpoint make_checkpoint(const TrainConfig& config, const TrainResult& result) {
  Checkpoint checkpoint;
  checkpoint.config = config.model;
  checkpoint.params = result.best_params;
  checkpoint.selected_epoch = result.best_epoch;
  if (!result.metrics.empty()) checkpoint.final_metrics = result.metrics.back();
  checkpoint.seed = config.seed;
  checkpoint.epochs = config.epochs;
  checkpoint.learning_rate = config.learning_rate;
  checkpoint.batch_size = config.batch_size;
  checkpoint.optimizer = std::string(optimizer_name(config.optimizer));
  checkpoint.augmentation = format_augmentation(config.augmentation);
  return checkpoint;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  json header = {{"config", config_to_json(checkpoint.config)},
                 {"seed", checkpoint.seed},
                 {"selected_epoch", checkpoint.selected_epoch},
                 {"epochs", checkpoint.epochs},
                 {"learning_rate", checkpoint.learning_rate},
                 {"batch_size", checkpoint.batch_size},
                 {"optimizer", checkpoint.optimizer},
                 {"augmentation", checkpoint.augmentation},
                 {"final_metrics", checkpoint.final_metrics
                                       ? metrics_to_json(*checkpoint.final_metrics)
                                       : json(nullptr)}};
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint16_t>(out, kCheckpointVersion);
  put_bytes(out, header.dump());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.params.tensor_count()));
  for (const auto& entry : checkpoint.params.entries()) {
    put_bytes(out, entry.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entry.value.rank()));
    for (std::size_t d : entry.value.shape()) put<std::uint64_t>(out, d);
    put<std::uint64_t>(out, entry.value.size());
    for (double v : entry.value.data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  put<std::uint32_t>(out, checksum(out.data(), out.size()));
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw IntegrityError("checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IntegrityError("not a checkpoint (bad magic bytes)");
  }
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       " is not supported; this build reads version " +
                       std::to_string(kCheckpointVersion));
  }
  if (bytes.size() < 10) throw IntegrityError("checkpoint is truncated");
  const std::size_t body = bytes.size() - 4;
  Reader trailer(bytes.subspan(body));
  if (trailer.get<std::uint32_t>() != checksum(bytes.data(), body)) {
    throw IntegrityError("checkpoint checksum mismatch (file is corrupt or truncated)");
  }

  Reader in(bytes.subspan(6, body - 6));
  Checkpoint checkpoint;
  try {
    const json header = json::parse(in.get_bytes());
    checkpoint.config = config_from_json(header.at("config"));
    checkpoint.seed = header.at("seed").get<std::uint64_t>();
    checkpoint.selected_epoch = header.at("selected_epoch").get<std::size_t>();
    checkpoint.epochs = header.at("epochs").get<std::size_t>();
    checkpoint.learning_rate = header.at("learning_rate").get<double>();
    checkpoint.batch_size = header.at("batch_size").get<std::size_t>();
    checkpoint.optimizer = header.at("optimizer").get<std::string>();
    checkpoint.augmentation = header.at("augmentation").get<std::string>();
    if (!header.at("final_metrics").is_null()) {
      checkpoint.final_metrics = metrics_from_json(header.at("final_metrics"));
    }
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("checkpoint header is malformed: ") + e.what());
  }

  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = in.get_bytes();
    const auto rank = in.get<std::uint32_t>();
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.get<std::uint64_t>());
    const auto size = in.get<std::uint64_t>();
    if (rank == 0 || size != shape_volume(shape) || size > in.remaining() / 8) {
      throw IntegrityError("checkpoint tensor '" + name + "' has an inconsistent shape");
    }
    std::vector<double> values(size);
    for (double& v : values) v = std::bit_cast<double>(in.get<std::uint64_t>());
    checkpoint.params.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (in.remaining() != 0) throw IntegrityError("checkpoint has trailing bytes");

  try {
    build_model(checkpoint.config).require_compatible(checkpoint.params, "checkpoint");
  } catch (const Error& e) {
    throw IntegrityError(std::string("checkpoint parameters do not match its config: ") +
                         e.what());
  }
  return checkpoint;
}

void save_checkpoint(const Checkpoint& checkpoint, const fs::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(checkpoint);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into '" + path.string() + "': " + ec.message());
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  try {
    return deserialize_checkpoint(bytes);
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + without_prefix(e.what(), "version error: "));
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + without_prefix(e.what(), "integrity error: "));
  }
}

// ---------------------------------------------------------------------------

std::string format_metrics(std::span<const MetricsRecord> records) {
  std::string out = std::string(kMetricsHeader) + "\n";
  char line[160];
  for (const MetricsRecord& r : records) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss,
                  r.train_accuracy, r.val_loss, r.val_accuracy);
    out += line;
  }
  return out;
}

void export_metrics(std::span<const MetricsRecord> records, const fs::path& path) {
  if (records.empty()) throw ValidationError("no metrics to export");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << format_metrics(records);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<MetricsRecord> parse_metrics(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ValidationError("metrics file must start with '" + std::string(kMetricsHeader) + "'");
  }
  std::vector<MetricsRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    MetricsRecord r;
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%lf,%lf%n", &r.epoch, &r.train_loss,
                    &r.train_accuracy, &r.val_loss, &r.val_accuracy, &consumed) != 5 ||
        static_cast<std::size_t>(consumed) != line.size()) {
      throw ValidationError("malformed metrics line " + std::to_string(line_no) + ": '" +
                            line + "'");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<MetricsRecord> read_metrics(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_metrics(text.str());
}

}  // namespace seedscan
