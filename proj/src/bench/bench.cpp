// SPDX-License-Identifier: Apache-2.0
#include "glint/bench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "glint/attention/attention.hpp"
#include "glint/model/model.hpp"
#include "glint/numerics/init.hpp"

namespace glint::bench {

using num::Tensor;
using num::Var;

nlohmann::json to_json(const TimingRecord& r) {
  return {{"component", r.component}, {"n", r.n},         {"d", r.d},
          {"k", r.k},                 {"batch", r.batch}, {"median_seconds", r.median_seconds},
          {"reps", r.reps},           {"inner", r.inner}};
}

void write_timing_csv(std::ostream& out, std::span<const TimingRecord> records) {
  out << "component,n,d,k,batch,median_seconds,reps,inner\n";
  for (const auto& r : records) {
    out << r.component << ',' << r.n << ',' << r.d << ',' << r.k << ',' << r.batch << ','
        << r.median_seconds << ',' << r.reps << ',' << r.inner << '\n';
  }
}

std::pair<double, std::size_t> median_time(const std::function<void()>& fn,
                                           const TimingOptions& opts) {
  if (opts.reps < 5) throw std::invalid_argument("median_time: need at least 5 repetitions");
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < opts.warmup; ++i) fn();
  std::size_t inner = 1;
  while (true) {
    std::vector<double> samples;
    samples.reserve(opts.reps);
    for (std::size_t r = 0; r < opts.reps; ++r) {
      const auto start = clock::now();
      for (std::size_t i = 0; i < inner; ++i) fn();
      samples.push_back(std::chrono::duration<double>(clock::now() - start).count());
    }
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    const double median = samples[samples.size() / 2];
    if (median >= opts.min_seconds || inner >= (1u << 20)) {
      return {median / static_cast<double>(inner), inner};
    }
    inner *= 10;
  }
}

std::string_view component_name(Component c) {
  switch (c) {
    case Component::kGlintLayer: return "glint_layer";
    case Component::kLinearAttention: return "linear_attn";
    case Component::kQuadraticAttention: return "quadratic_attn";
  }
  return "?";
}

Component parse_component(std::string_view name) {
  for (Component c : {Component::kGlintLayer, Component::kLinearAttention,
                      Component::kQuadraticAttention}) {
    if (component_name(c) == name) return c;
  }
  throw std::invalid_argument("unknown component '" + std::string(name) +
                              "' (glint_layer, linear_attn, quadratic_attn)");
}

TimingRecord time_component(Component component, std::size_t n, const SweepOptions& opts) {
  if (n == 0) throw std::invalid_argument("time_component: length must be positive");
  Rng rng(opts.seed);
  const std::size_t d = opts.d;
  model::ModelConfig cfg;
  cfg.vocab_size = 2;
  cfg.hidden = d;
  cfg.kernel = opts.k;
  cfg.heads = opts.heads;
  cfg.layers = 1;
  cfg.dropout = 0.0;
  cfg.max_len = n;
  const model::GlintModel layer(cfg, opts.seed);
  const attn::AttentionParams att{Var::constant(num::xavier_uniform({d, d}, rng)),
                                  Var::constant(num::xavier_uniform({d, d}, rng)),
                                  Var::constant(num::xavier_uniform({d, d}, rng)), opts.heads};
  Tensor input({opts.batch, n, d});
  for (double& v : input.data()) v = 2.0 * uniform01(rng) - 1.0;
  const Var x = Var::constant(input);

  std::function<void()> run;
  switch (component) {
    case Component::kGlintLayer:
      run = [&] {
        num::Tape tape(false);
        Rng unused(0);
        layer.layer_forward(tape, x, 0, nullptr, false, unused);
      };
      break;
    case Component::kLinearAttention:
      run = [&] { attn::linear_attention(x, att); };
      break;
    case Component::kQuadraticAttention:
      run = [&] { attn::quadratic_softmax_attention(x, att); };
      break;
  }
  const auto [median, inner] = median_time(run, opts.timing);
  return {std::string(component_name(component)), n, d, opts.k, opts.batch, median,
          opts.timing.reps, inner};
}

std::vector<TimingRecord> scaling_sweep(Component component, std::span<const std::size_t> lengths,
                                        const SweepOptions& opts) {
  if (lengths.size() < 3) throw std::invalid_argument("scaling_sweep: need at least 3 lengths");
  if (!std::is_sorted(lengths.begin(), lengths.end()) || lengths.front() == 0) {
    throw std::invalid_argument("scaling_sweep: lengths must be positive and ascending");
  }
  std::vector<TimingRecord> out;
  for (std::size_t n : lengths) out.push_back(time_component(component, n, opts));
  return out;
}

double loglog_slope(std::span<const TimingRecord> records) {
  if (records.size() < 2) throw std::invalid_argument("loglog_slope: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(records.size());
  for (const auto& r : records) {
    const double x = std::log(static_cast<double>(r.n)), y = std::log(r.median_seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

// Median forward time over the first test batch.
TimingRecord time_inference(const model::GlintModel& m, const data::InteractionDataset& ds,
                            const data::SplitViews& split, std::size_t batch_size,
                            const std::string& label) {
  data::BatchStream stream(ds, split.test, m.config().max_len, batch_size);
  const auto batch = stream.next();
  if (!batch) return {};
  const auto [median, inner] = median_time([&] {
    num::Tape tape(false);
    Rng unused(0);
    m.forward(tape, *batch, false, unused);
  });
  return {label, batch->steps, m.config().hidden, m.config().kernel, batch->batch, median, 5,
          inner};
}

struct Trained {
  training::TrainLog log;
  eval::MetricsReport test;
  TimingRecord inference;
};

Trained train_and_test(const model::ModelConfig& cfg, const data::InteractionDataset& ds,
                       const data::SplitViews& split, const training::TrainConfig& train_cfg,
                       const std::string& label) {
  model::GlintModel m(cfg, train_cfg.seed);
  Trained t;
  t.log = training::train(m, ds, split, train_cfg);
  t.test = eval::evaluate(m, ds, split.test,
                          {train_cfg.k, train_cfg.exclude_seen, train_cfg.eval_batch_size})
               .report;
  t.inference = time_inference(m, ds, split, train_cfg.eval_batch_size, label);
  return t;
}

}  // namespace

double AblationResult::first_loss() const {
  return log.epochs.empty() ? 0.0 : log.epochs.front().train_loss;
}

double AblationResult::last_loss() const {
  return log.epochs.empty() ? 0.0 : log.epochs.back().train_loss;
}

nlohmann::json to_json(const AblationResult& r) {
  nlohmann::json j = {{"variant", model::variant_name(r.variant)}};
  if (!r.error.empty()) {
    j["error"] = r.error;
    return j;
  }
  j["epochs"] = r.log.epochs.size();
  j["best_epoch"] = r.log.best_epoch;
  j["first_loss"] = r.first_loss();
  j["last_loss"] = r.last_loss();
  j["test"] = eval::to_json(r.test);
  return j;
}

std::vector<AblationResult> ablation_run(const data::InteractionDataset& ds,
                                         const data::SplitViews& split,
                                         const model::ModelConfig& base,
                                         const training::TrainConfig& train_cfg,
                                         const Progress& progress) {
  std::vector<AblationResult> out;
  for (model::Variant v : model::kAllVariants) {
    AblationResult r;
    r.variant = v;
    const std::string name(model::variant_name(v));
    if (progress) progress("ablation: " + name);
    try {
      Trained t = train_and_test(model::apply_variant(base, v), ds, split, train_cfg, name);
      r.log = std::move(t.log);
      r.test = t.test;
      r.inference = t.inference;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string_view axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kKernel: return "k";
    case SweepAxis::kHidden: return "d";
    case SweepAxis::kLayers: return "L";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "k") return SweepAxis::kKernel;
  if (name == "d") return SweepAxis::kHidden;
  if (name == "L") return SweepAxis::kLayers;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "' (k, d, L)");
}

nlohmann::json to_json(const SweepPoint& p) {
  return {{"axis", axis_name(p.axis)},
          {"value", p.value},
          {"epochs", p.log.epochs.size()},
          {"last_loss", p.log.epochs.empty() ? 0.0 : p.log.epochs.back().train_loss},
          {"test", eval::to_json(p.test)},
          {"inference", to_json(p.inference)}};
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "axis,value,epochs,last_loss,recall,mrr,ndcg,k,inference_seconds\n";
  for (const auto& p : points) {
    out << axis_name(p.axis) << ',' << p.value << ',' << p.log.epochs.size() << ','
        << (p.log.epochs.empty() ? 0.0 : p.log.epochs.back().train_loss) << ',' << p.test.recall
        << ',' << p.test.mrr << ',' << p.test.ndcg << ',' << p.test.k << ','
        << p.inference.median_seconds << '\n';
  }
}

std::vector<SweepPoint> param_sweep(SweepAxis axis, std::span<const std::size_t> values,
                                    const data::InteractionDataset& ds,
                                    const data::SplitViews& split, const model::ModelConfig& base,
                                    const training::TrainConfig& train_cfg,
                                    const Progress& progress) {
  std::vector<SweepPoint> out;
  for (std::size_t value : values) {
    model::ModelConfig cfg = base;
    switch (axis) {
      case SweepAxis::kKernel: cfg.kernel = value; break;
      case SweepAxis::kHidden: cfg.hidden = value; break;
      case SweepAxis::kLayers: cfg.layers = value; break;
    }
    cfg.validate();
    if (progress) progress("sweep: " + std::string(axis_name(axis)) + "=" + std::to_string(value));
    Trained t = train_and_test(cfg, ds, split, train_cfg,
                               std::string(axis_name(axis)) + "=" + std::to_string(value));
    out.push_back({axis, value, std::move(t.log), t.test, t.inference});
  }
  return out;
}

}  // namespace glint::bench
