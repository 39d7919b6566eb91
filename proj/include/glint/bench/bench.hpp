// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glint/eval/metrics.hpp"
#include "glint/model/config.hpp"
#include "glint/training/trainer.hpp"

namespace glint::bench {

struct TimingRecord {
  std::string component;
  std::size_t n = 0, d = 0, k = 0, batch = 0;
  double median_seconds = 0.0;
  std::size_t reps = 0;
  std::size_t inner = 1;  // calls per timed repetition
};

nlohmann::json to_json(const TimingRecord& r);
void write_timing_csv(std::ostream& out, std::span<const TimingRecord> records);

struct TimingOptions {
  std::size_t reps = 5;      // timed repetitions, at least 5
  std::size_t warmup = 2;    // untimed leading runs
  double min_seconds = 1e-4; // below this per repetition, calls are batched
};

/// Median wall time of one call to `fn`. When a repetition is shorter than
/// `min_seconds`, each repetition runs `fn` repeatedly and reports the mean.
/// Returns {median seconds per call, calls per repetition}.
std::pair<double, std::size_t> median_time(const std::function<void()>& fn,
                                           const TimingOptions& opts = {});

enum class Component { kGlintLayer, kLinearAttention, kQuadraticAttention };

std::string_view component_name(Component c);  // glint_layer, linear_attn, quadratic_attn
Component parse_component(std::string_view name);

struct SweepOptions {
  std::size_t d = 32;
  std::size_t k = 3;
  std::size_t heads = 2;
  std::size_t batch = 8;
  std::uint64_t seed = 1;
  TimingOptions timing;
};

/// Forward time of one component on random [batch, n, d] input.
TimingRecord time_component(Component component, std::size_t n, const SweepOptions& opts);

/// Forward time of one component per sequence length in `lengths`
/// (ascending, at least three points), on random [batch, N, d] input.
std::vector<TimingRecord> scaling_sweep(Component component, std::span<const std::size_t> lengths,
                                        const SweepOptions& opts);

/// Least-squares slope of log(time) against log(N).
double loglog_slope(std::span<const TimingRecord> records);

struct AblationResult {
  model::Variant variant = model::Variant::kDefault;
  training::TrainLog log;
  eval::MetricsReport test;
  TimingRecord inference;
  std::string error;  // empty on success

  double first_loss() const;
  double last_loss() const;
};

nlohmann::json to_json(const AblationResult& r);

using Progress = std::function<void(const std::string&)>;

/// Trains and tests every variant from the same seed and budget.
std::vector<AblationResult> ablation_run(const data::InteractionDataset& ds,
                                         const data::SplitViews& split,
                                         const model::ModelConfig& base,
                                         const training::TrainConfig& train_cfg,
                                         const Progress& progress = {});

enum class SweepAxis { kKernel, kHidden, kLayers };

std::string_view axis_name(SweepAxis a);  // k, d, L
SweepAxis parse_axis(std::string_view name);

struct SweepPoint {
  SweepAxis axis = SweepAxis::kKernel;
  std::size_t value = 0;
  training::TrainLog log;
  eval::MetricsReport test;
  TimingRecord inference;
};

nlohmann::json to_json(const SweepPoint& p);
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

std::vector<SweepPoint> param_sweep(SweepAxis axis, std::span<const std::size_t> values,
                                    const data::InteractionDataset& ds,
                                    const data::SplitViews& split, const model::ModelConfig& base,
                                    const training::TrainConfig& train_cfg,
                                    const Progress& progress = {});

}  // namespace glint::bench
