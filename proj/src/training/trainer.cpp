// SPDX-License-Identifier: Apache-2.0
#include "glint/training/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "glint/numerics/adam.hpp"
#include "glint/numerics/checkpoint.hpp"
#include "glint/numerics/errors.hpp"

namespace glint::training {

using num::Tensor;
using num::Var;

Var cross_entropy_loss(const Var& logits, std::span<const std::int32_t> targets) {
  const Tensor& z = logits.value();
  if (z.rank() != 2) throw ShapeError("cross_entropy_loss: logits must be [B, V]");
  const std::size_t rows = z.dim(0), v = z.dim(1);
  if (rows == 0 || targets.size() != rows) {
    throw ShapeError("cross_entropy_loss: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(rows) + " rows");
  }
  for (std::int32_t t : targets) {
    if (t == 0) throw std::invalid_argument("cross_entropy_loss: padding item as target");
    if (t < 0 || static_cast<std::size_t>(t) >= v) {
      throw std::out_of_range("cross_entropy_loss: target " + std::to_string(t) + " outside " +
                              std::to_string(v) + " classes");
    }
  }
  Tensor prob({rows, v});
  double total = 0.0;
  for (std::size_t b = 0; b < rows; ++b) {
    const double* zr = z.raw() + b * v;
    double* pr = prob.raw() + b * v;
    double m = zr[0];
    for (std::size_t i = 1; i < v; ++i) m = std::max(m, zr[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < v; ++i) s += (pr[i] = std::exp(zr[i] - m));
    for (std::size_t i = 0; i < v; ++i) pr[i] /= s;
    total += m + std::log(s) - zr[targets[b]];
  }
  const double inv = 1.0 / static_cast<double>(rows);
  std::vector<std::int32_t> tgt(targets.begin(), targets.end());
  return num::make_op("cross_entropy", Tensor::vector({total * inv}), {logits},
                      [logits, prob = std::move(prob), tgt = std::move(tgt), inv, v](
                          const Tensor& g) {
                        Tensor dz = prob;
                        for (std::size_t b = 0; b < tgt.size(); ++b) dz[b * v + tgt[b]] -= 1.0;
                        const double scale = g[0] * inv;
                        for (double& x : dz.data()) x *= scale;
                        num::accumulate_grad(logits, dz);
                      });
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
  if (!(lr >= 0.0) || !std::isfinite(lr)) fail("lr must be a finite non-negative number");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (batch_size == 0 || eval_batch_size == 0) fail("batch sizes must be positive");
  if (patience < 1) fail("patience must be at least 1");
  if (k < 1) fail("k must be at least 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"eval_batch_size", c.eval_batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"k", c.k},
          {"exclude_seen", c.exclude_seen}};
}

nlohmann::json to_json(const EpochRecord& r, bool with_time) {
  nlohmann::json mixing = nlohmann::json::array();
  for (const auto& [a, g] : r.mixing) mixing.push_back({a, g});
  nlohmann::json j = {{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"valid", eval::to_json(r.valid)},
                      {"mixing", std::move(mixing)}};
  if (with_time) j["wall_seconds"] = r.wall_seconds;
  return j;
}

TrainingError::TrainingError(const std::string& what, std::size_t epoch, std::size_t batch)
    : std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                         ": " + what),
      epoch_(epoch),
      batch_(batch) {}

TrainLog train(model::GlintModel& model, const data::InteractionDataset& ds,
               const data::SplitViews& split, const TrainConfig& cfg,
               const EpochCallback& on_epoch) {
  cfg.validate();
  if (split.train.empty()) throw std::invalid_argument("train: no training examples");
  num::ParamStore& params = model.params();
  num::AdamOptions opts;
  opts.lr = cfg.lr;
  opts.weight_decay = cfg.weight_decay;
  num::Adam adam(params, opts);

  Rng shuffle_rng(cfg.seed ^ 0x5eed5eed5eedULL);
  Rng dropout_rng(cfg.seed + 1);
  const eval::EvalConfig eval_cfg{cfg.k, cfg.exclude_seen, cfg.eval_batch_size};

  TrainLog log;
  num::ParamStore best = params.clone();
  double best_ndcg = -1.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    data::BatchStream stream(ds, split.train, model.config().max_len, cfg.batch_size,
                             shuffle_rng());
    double loss_sum = 0.0;
    std::size_t seen = 0, batch_index = 0;
    while (auto batch = stream.next()) {
      try {
        num::Tape tape;
        const Var loss =
            cross_entropy_loss(model.forward(tape, *batch, true, dropout_rng), batch->targets);
        tape.backward(loss);
        adam.step(params);
        params.zero_grad();
        loss_sum += loss.value()[0] * static_cast<double>(batch->batch);
        seen += batch->batch;
      } catch (const NonFiniteError& e) {
        throw TrainingError(e.what(), epoch, batch_index);
      }
      ++batch_index;
      ++log.steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    if (!split.valid.empty()) rec.valid = eval::evaluate(model, ds, split.valid, eval_cfg).report;
    for (std::size_t l = 0; l < model.config().layers; ++l) {
      rec.mixing.push_back(model.mixing_weights(l));
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (rec.valid.ndcg > best_ndcg) {
      best_ndcg = rec.valid.ndcg;
      log.best_epoch = epoch;
      best = params.clone();
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      log.stopped_early = true;
      break;
    }
  }
  log.best_valid_ndcg = best_ndcg;
  params.assign(best);
  return log;
}

void save_checkpoint(const std::filesystem::path& dir, const model::GlintModel& model,
                     const nlohmann::json& extra) {
  nlohmann::json meta = {{"kind", "glint-model"}, {"model", model::to_json(model.config())}};
  if (!extra.empty()) meta["extra"] = extra;
  num::save_archive(dir, model.params(), meta);
}

model::GlintModel load_checkpoint(const std::filesystem::path& dir) {
  const num::Archive archive = num::load_archive(dir);
  if (!archive.metadata.contains("model")) {
    throw num::ArchiveError(dir.string() + ": manifest carries no model config");
  }
  model::ModelConfig cfg;
  try {
    cfg = model::model_config_from_json(archive.metadata.at("model"));
  } catch (const std::exception& e) {
    throw num::ArchiveError(dir.string() + ": bad model config: " + e.what());
  }
  model::GlintModel m(cfg, 0);
  num::load_archive_into(dir, m.params());
  return m;
}

void load_checkpoint_into(const std::filesystem::path& dir, model::GlintModel& model) {
  num::load_archive_into(dir, model.params());
}

}  // namespace glint::training
