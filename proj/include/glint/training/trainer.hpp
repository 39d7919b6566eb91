// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glint/data/split.hpp"
#include "glint/eval/metrics.hpp"
#include "glint/model/model.hpp"

namespace glint::training {

/// Mean over rows of -log softmax(logits[b])[targets[b]], stable
/// log-sum-exp. Target 0 (padding) is rejected.
num::Var cross_entropy_loss(const num::Var& logits, std::span<const std::int32_t> targets);

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t batch_size = 2048;
  std::size_t eval_batch_size = 2048;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;  // epochs without a better validation NDCG@k
  std::uint64_t seed = 42;
  std::size_t k = 10;
  bool exclude_seen = true;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  eval::MetricsReport valid;
  double wall_seconds = 0.0;
  std::vector<std::pair<double, double>> mixing;  // per layer (attention, GRU)
};

/// Without wall time when `with_time` is false, so logs compare bytewise.
nlohmann::json to_json(const EpochRecord& r, bool with_time = true);

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_valid_ndcg = 0.0;
  bool stopped_early = false;
  std::size_t steps = 0;
};

/// Non-finite loss or gradient during training; names the batch.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, std::size_t batch);
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_, batch_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam over shuffled training batches, one validation pass per epoch,
/// patience-based early stopping. On return the model holds the
/// parameters of the best validation epoch.
TrainLog train(model::GlintModel& model, const data::InteractionDataset& ds,
               const data::SplitViews& split, const TrainConfig& cfg,
               const EpochCallback& on_epoch = {});

/// Archive with the model config embedded in the manifest metadata.
void save_checkpoint(const std::filesystem::path& dir, const model::GlintModel& model,
                     const nlohmann::json& extra = nlohmann::json::object());

/// Rebuilds the model from the stored config and loads every tensor.
model::GlintModel load_checkpoint(const std::filesystem::path& dir);

/// Loads into an existing model; names and shapes must match its config.
void load_checkpoint_into(const std::filesystem::path& dir, model::GlintModel& model);

}  // namespace glint::training
