// SPDX-License-Identifier: Apache-2.0
// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero
// when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "glint/attention/attention.hpp"
#include "glint/bench/bench.hpp"
#include "glint/cli/cli.hpp"
#include "glint/data/dataset.hpp"
#include "glint/data/split.hpp"
#include "glint/eval/metrics.hpp"
#include "glint/layers/dense_selective_gru.hpp"
#include "glint/layers/gru.hpp"
#include "glint/layers/temporal_conv.hpp"
#include "glint/model/model.hpp"
#include "glint/training/trainer.hpp"
#include "gradcheck.hpp"

namespace {

using namespace glint;
using num::Tensor;
using num::Var;
using testing::random_tensor;

// Pinned tolerances and budgets.
constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-4;
constexpr double kAssociativityTolerance = 1e-12;
constexpr double kDecompositionTolerance = 1e-10;
constexpr double kMetricTolerance = 1e-12;
constexpr double kMinRecall = 0.95;
constexpr double kMinNdcg = 0.7;
constexpr double kChance = 0.2;
constexpr double kChanceBand = 0.05;
constexpr double kMaxLinearSlope = 1.3;
constexpr double kMinQuadraticSlope = 1.7;
constexpr double kMaxKernelSpread = 0.6;
constexpr double kMinLossDrop = 0.2;

struct Outcome {
  enum Status { kPass, kFail, kSkip } status;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- 1. gradients -----------------------------------------------------------

struct FdCase {
  std::string name;
  testing::Fn fn;
  std::vector<Tensor> inputs;
};

std::vector<FdCase> fd_cases() {
  Rng rng(2024);
  auto r = [&](num::Shape s, double lo = -1.0, double hi = 1.0) {
    return random_tensor(s, rng, lo, hi);
  };
  std::vector<FdCase> cases;
  cases.push_back({"add", [](auto& v) { return num::add(v[0], v[1]); }, {r({3, 4}), r({3, 4})}});
  cases.push_back({"sub", [](auto& v) { return num::sub(v[0], v[1]); }, {r({3, 4}), r({3, 4})}});
  cases.push_back({"mul", [](auto& v) { return num::mul(v[0], v[1]); }, {r({3, 4}), r({3, 4})}});
  cases.push_back({"scale", [](auto& v) { return num::scale(v[0], -1.7); }, {r({2, 5})}});
  cases.push_back(
      {"scale_by", [](auto& v) { return num::scale_by(v[0], v[1], 1); }, {r({2, 3, 4}), r({2})}});
  cases.push_back(
      {"add_bias", [](auto& v) { return num::add_bias(v[0], v[1]); }, {r({2, 3, 4}), r({4})}});
  cases.push_back({"sum_all", [](auto& v) { return num::sum_all(v[0]); }, {r({3, 3})}});
  cases.push_back({"matmul", [](auto& v) { return num::matmul(v[0], v[1]); }, {r({3, 4}), r({4, 2})}});
  cases.push_back({"matmul_t", [](auto& v) { return num::matmul(v[0], v[1], true, true); },
                   {r({4, 3}), r({2, 4})}});
  cases.push_back({"bmm", [](auto& v) { return num::bmm(v[0], v[1], false, true); },
                   {r({2, 3, 4}), r({2, 5, 4})}});
  cases.push_back({"linear", [](auto& v) { return num::linear(v[0], v[1], v[2]); },
                   {r({2, 3, 4}), r({4, 5}), r({5})}});
  cases.push_back({"reshape", [](auto& v) { return num::reshape(v[0], {6, 2}); }, {r({3, 4})}});
  for (auto kind : {num::Activation::kSigmoid, num::Activation::kTanh, num::Activation::kElu,
                    num::Activation::kSilu, num::Activation::kGelu, num::Activation::kRelu}) {
    // Inputs kept away from 0 so the ReLU and ELU kinks are not straddled.
    Tensor x = r({4, 5}, 0.05, 2.0);
    for (std::size_t i = 0; i < x.size(); i += 2) x[i] = -x[i];
    cases.push_back({"activation:" + std::string(num::activation_name(kind)),
                     [kind](auto& v) { return num::activation(v[0], kind); }, {x}});
  }
  cases.push_back({"softmax_rows", [](auto& v) { return num::softmax_rows(v[0]); }, {r({3, 5}, -3, 3)}});
  cases.push_back({"l2_rows", [](auto& v) { return num::l2_normalize(v[0], num::NormAxis::kRow); },
                   {r({3, 4})}});
  cases.push_back(
      {"l2_columns", [](auto& v) { return num::l2_normalize(v[0], num::NormAxis::kColumn); },
       {r({2, 4, 3})}});
  cases.push_back({"concat_cols", [](auto& v) { return num::concat_cols(v[0], v[1]); },
                   {r({3, 2}), r({3, 4})}});
  cases.push_back({"split_heads", [](auto& v) { return num::split_heads(v[0], 2); }, {r({2, 3, 4})}});
  cases.push_back({"merge_heads", [](auto& v) { return num::merge_heads(v[0], 2); }, {r({4, 3, 2})}});
  const std::vector<std::int32_t> idx{0, 3, 1, 3};
  cases.push_back(
      {"gather_rows", [idx](auto& v) { return num::gather_rows(v[0], idx); }, {r({5, 3})}});
  const std::vector<double> rows{1.0, 0.0, 1.0, 1.0};
  cases.push_back({"mask_rows", [rows](auto& v) { return num::mask_rows(v[0], rows); }, {r({2, 2, 3})}});
  cases.push_back({"take_step", [](auto& v) { return num::take_step(v[0], 1); }, {r({2, 3, 4})}});
  cases.push_back({"dropout", [](auto& v) {
                     Rng local(5);
                     return num::dropout(v[0], 0.3, true, local);
                   },
                   {r({4, 5})}});

  for (std::size_t k : {1u, 3u, 5u}) {
    cases.push_back({"depthwise_conv1d:k=" + std::to_string(k),
                     [](auto& v) { return layers::depthwise_conv1d(v[0], v[1]); },
                     {r({2, 5, 3}), r({k, 3})}});
  }
  const layers::PaddingMask mask(4, {4, 2});
  cases.push_back({"temporal_conv1d", [mask](auto& v) {
                     return layers::temporal_conv1d(v[0], {v[1], v[2], v[3]}, true, &mask);
                   },
                   {r({2, 4, 3}), r({3, 3}), r({3, 3}), r({3})}});
  auto gru = [](const std::vector<Var>& v, std::size_t o) {
    return layers::GruParams{v[o], v[o + 1], v[o + 2], v[o + 3], v[o + 4], v[o + 5]};
  };
  const std::size_t d = 3;
  std::vector<Tensor> gru_w{r({2 * d, d}), r({d}), r({2 * d, d}), r({d}), r({2 * d, d}), r({d})};
  auto with = [&](std::vector<Tensor> head, const std::vector<Tensor>& tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  cases.push_back({"gru_cell", [gru](auto& v) { return layers::gru_cell(v[0], v[1], gru(v, 2)).hidden; },
                   with({r({2, d}), r({2, d})}, gru_w)});
  const std::vector<std::size_t> lengths{4, 2};
  cases.push_back({"gru_sequence", [gru, lengths](auto& v) {
                     return layers::gru_sequence(v[0], gru(v, 1), lengths).hidden;
                   },
                   with({r({2, 4, d})}, gru_w)});
  std::vector<Tensor> gate_w{r({d, d}), r({d}), r({d, d}), r({d}), r({d, d}), r({d})};
  cases.push_back({"selective_gate", [](auto& v) {
                     return layers::selective_gate(v[0], v[1],
                                                   {v[2], v[3], v[4], v[5], v[6], v[7]});
                   },
                   with({r({2, 4, d}), r({2, 4, d})}, gate_w)});
  cases.push_back({"dense_selective_gru", [gru, mask](auto& v) {
                     layers::DenseSelectiveGruParams p;
                     p.input_conv = {v[1], v[2], v[3]};
                     p.output_kernel = v[4];
                     p.gru = gru(v, 5);
                     p.gate = {v[11], v[12], v[13], v[14], v[15], v[16]};
                     return layers::dense_selective_gru(v[0], p, &mask);
                   },
                   with(with({r({2, 4, d}), r({3, d}), r({d, d}), r({d}), r({3, d})}, gru_w),
                        gate_w)});
  const std::size_t da = 4;
  cases.push_back({"linear_attention", [](auto& v) {
                     return attn::linear_attention(v[0], {v[1], v[2], v[3], 2});
                   },
                   {r({2, 3, da}), r({da, da}), r({da, da}), r({da, da})}});
  cases.push_back({"quadratic_attention", [](auto& v) {
                     return attn::quadratic_softmax_attention(v[0], {v[1], v[2], v[3], 2});
                   },
                   {r({2, 3, da}), r({da, da}), r({da, da}), r({da, da})}});
  const std::vector<std::int32_t> targets{2, 5, 1};
  cases.push_back({"cross_entropy", [targets](auto& v) {
                     return training::cross_entropy_loss(v[0], targets);
                   },
                   {r({3, 6}, -2, 2)}});
  return cases;
}

Outcome gradients() {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0, ops = 0;
  for (const auto& c : fd_cases()) {
    const auto rep = testing::gradcheck(c.fn, c.inputs, 7, kFdStep);
    checked += rep.checked;
    ++ops;
    if (rep.max_rel_error > worst) {
      worst = rep.max_rel_error;
      where = c.name + " " + rep.worst;
    }
  }

  // Full stacked model.
  model::ModelConfig cfg;
  cfg.vocab_size = 7;
  cfg.hidden = 4;
  cfg.kernel = 3;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.dropout = 0.0;
  cfg.max_len = 3;
  model::GlintModel m(cfg, 11);
  Rng rng(12);
  for (const auto& [name, node] : m.params()) {
    if (name == "embedding") continue;
    node->value = random_tensor(node->value.shape(), rng, -0.5, 0.5);
  }
  data::Batch batch;
  batch.batch = 2;
  batch.steps = 3;
  batch.items = {3, 1, 6, 0, 2, 5};
  batch.lengths = {3, 2};
  batch.targets = {4, 1};
  batch.example_ids = {0, 1};
  const auto model_rep = testing::gradcheck_params(
      m.params(),
      [&](num::Tape& tape) {
        Rng unused(0);
        return training::cross_entropy_loss(m.forward(tape, batch, false, unused), batch.targets);
      },
      kFdStep);
  checked += model_rep.checked;
  if (model_rep.max_rel_error > worst) {
    worst = model_rep.max_rel_error;
    where = "model " + model_rep.worst;
  }
  return verdict(worst <= kFdTolerance,
                 std::to_string(ops) + " ops + full model, " + std::to_string(checked) +
                     " entries, max rel err " + fmt("%.2e", worst) + " at " + where);
}

// --- 2. associativity -------------------------------------------------------

Outcome associativity() {
  Rng rng(3);
  double worst = 0.0;
  const std::size_t dims[] = {4, 8, 16, 32};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 64);
    const std::size_t d = dims[uniform_index(rng, 4)];
    const std::size_t heads = std::size_t{1} << uniform_index(rng, 3);
    const attn::AttentionParams p{Var::constant(random_tensor({d, d}, rng)),
                                  Var::constant(random_tensor({d, d}, rng)),
                                  Var::constant(random_tensor({d, d}, rng)), heads};
    const Var x = Var::constant(random_tensor({n, d}, rng, -2, 2));
    worst = std::max(worst, num::max_abs_diff(attn::linear_attention(x, p).value(),
                                              attn::linear_attention_query_first(x, p).value()));
  }
  return verdict(worst <= kAssociativityTolerance,
                 "100 instances, max abs diff " + fmt("%.2e", worst));
}

// --- 3. GRU decomposition ---------------------------------------------------

Outcome decomposition() {
  Rng rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 16), d = 1 + uniform_index(rng, 8);
    layers::GruParams p;
    for (Var* w : {&p.w_update, &p.w_reset, &p.w_cand}) {
      *w = Var::constant(random_tensor({2 * d, d}, rng));
    }
    for (Var* b : {&p.b_update, &p.b_reset, &p.b_cand}) {
      *b = Var::constant(random_tensor({d}, rng));
    }
    const auto seq = layers::gru_sequence(Var::constant(random_tensor({n, d}, rng, -2, 2)), p);
    const Tensor& z = seq.trace.update;
    const Tensor& c = seq.trace.cand;
    // h_t = Σ_{k≤t} (Π_{k<i≤t} z_i) (1 - z_k) h̃_k
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k <= t; ++k) {
          double carry = 1.0;
          for (std::size_t i = k + 1; i <= t; ++i) carry *= z.at(i, j);
          s += carry * (1.0 - z.at(k, j)) * c.at(k, j);
        }
        worst = std::max(worst, std::abs(s - seq.hidden.value().at(t, j)));
      }
    }
  }
  return verdict(worst <= kDecompositionTolerance,
                 "100 trials, max abs diff " + fmt("%.2e", worst));
}

// --- 4. learnability --------------------------------------------------------

Outcome learnability() {
  const auto ds = data::synth_cyclic(50, 500, 30, 1);
  const auto split = data::leave_one_out_split(ds);
  model::ModelConfig cfg;
  cfg.vocab_size = ds.vocab_size();
  cfg.hidden = 32;
  cfg.kernel = 3;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.dropout = 0.2;
  cfg.max_len = 20;
  training::TrainConfig tc;
  tc.lr = 1e-3;
  tc.batch_size = 128;
  tc.eval_batch_size = 512;
  tc.max_epochs = 50;
  tc.patience = 10;
  tc.seed = 42;
  tc.exclude_seen = false;
  const eval::EvalConfig ec{10, false, 512};

  // Untrained recall over several initialisations.
  double chance = 0.0;
  const int inits = 16;
  for (int s = 0; s < inits; ++s) {
    const model::GlintModel m(cfg, 1000 + s);
    chance += eval::evaluate(m, ds, split.test, ec).report.recall;
  }
  chance /= inits;

  model::GlintModel m(cfg, tc.seed);
  const auto log = training::train(m, ds, split, tc);
  const auto test = eval::evaluate(m, ds, split.test, ec).report;
  const bool ok = test.recall >= kMinRecall && test.ndcg >= kMinNdcg &&
                  std::abs(chance - kChance) <= kChanceBand;
  return verdict(ok, "test recall@10 " + fmt("%.4f", test.recall) + ", ndcg@10 " +
                         fmt("%.4f", test.ndcg) + " after " + std::to_string(log.epochs.size()) +
                         " epochs (best " + std::to_string(log.best_epoch) +
                         "); untrained recall@10 " + fmt("%.4f", chance) + " over " +
                         std::to_string(inits) + " inits");
}

// --- 5. scaling -------------------------------------------------------------

Outcome scaling() {
  bench::SweepOptions opts;
  opts.d = 32;
  opts.k = 3;
  opts.heads = 2;
  opts.batch = 8;
  const std::vector<std::size_t> lengths{128, 256, 512, 1024};
  const auto glint = bench::scaling_sweep(bench::Component::kGlintLayer, lengths, opts);
  const auto quad = bench::scaling_sweep(bench::Component::kQuadraticAttention, lengths, opts);
  const double a = bench::loglog_slope(glint), b = bench::loglog_slope(quad);
  std::string times;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    times += " " + std::to_string(lengths[i]) + ":" + fmt("%.3g", glint[i].median_seconds) + "/" +
             fmt("%.3g", quad[i].median_seconds);
  }
  return verdict(a <= kMaxLinearSlope && b >= kMinQuadraticSlope,
                 "glint slope " + fmt("%.3f", a) + ", quadratic slope " + fmt("%.3f", b) +
                     "; seconds glint/quadratic" + times);
}

// --- 6. kernel size ---------------------------------------------------------

Outcome kernel_stability() {
  bench::SweepOptions opts;
  opts.d = 32;
  opts.heads = 2;
  opts.batch = 8;
  double lo = 1e300, hi = 0.0;
  std::string times;
  for (std::size_t k : {1u, 3u, 5u, 7u, 9u}) {
    opts.k = k;
    const auto r = bench::time_component(bench::Component::kGlintLayer, 256, opts);
    lo = std::min(lo, r.median_seconds);
    hi = std::max(hi, r.median_seconds);
    times += " k" + std::to_string(k) + ":" + fmt("%.3g", r.median_seconds);
  }
  const double spread = (hi - lo) / lo;
  return verdict(spread <= kMaxKernelSpread,
                 "spread " + fmt("%.1f", 100 * spread) + "%;" + times);
}

// --- 7. metrics -------------------------------------------------------------

Outcome metrics() {
  Rng rng(7);
  double worst = 0.0;
  for (std::size_t k : {1u, 5u, 10u, 20u, 50u}) {
    std::vector<std::size_t> ranks(1000);
    for (auto& r : ranks) r = 1 + uniform_index(rng, 100);
    double rec = 0, mrr = 0, ndcg = 0;
    for (std::size_t r : ranks) {
      if (r > k) continue;
      rec += 1.0;
      mrr += 1.0 / static_cast<double>(r);
      ndcg += std::log(2.0) / std::log(static_cast<double>(r) + 1.0);
    }
    const auto m = eval::metrics_at_k(ranks, k);
    worst = std::max({worst, std::abs(m.recall - rec / 1000), std::abs(m.mrr - mrr / 1000),
                      std::abs(m.ndcg - ndcg / 1000)});
  }
  const std::vector<std::size_t> one{1}, beyond{11, 12, 400};
  const auto top = eval::metrics_at_k(one, 10), miss = eval::metrics_at_k(beyond, 10);
  const bool boundary = top.recall == 1.0 && top.mrr == 1.0 && top.ndcg == 1.0 &&
                        miss.recall == 0.0 && miss.mrr == 0.0 && miss.ndcg == 0.0;
  return verdict(worst <= kMetricTolerance && boundary,
                 "1000 ranks x 5 cutoffs, max abs diff " + fmt("%.2e", worst) +
                     (boundary ? ", boundary identities exact" : ", boundary identities broken"));
}

// --- 8. protocol ------------------------------------------------------------

std::string check_protocol(const data::InteractionDataset& ds) {
  const auto split = data::leave_one_out_split(ds);
  if (split.valid.size() != ds.num_users()) return "valid count != users";
  if (split.test.size() != ds.num_users()) return "test count != users";
  for (const auto& ex : split.valid) {
    if (ex.length + 2 != ds.sequences[ex.user].size()) return "valid target not penultimate";
  }
  for (const auto& ex : split.test) {
    if (ex.length + 1 != ds.sequences[ex.user].size()) return "test target not last";
  }
  std::vector<std::vector<char>> seen(ds.num_users());
  for (std::size_t u = 0; u < ds.num_users(); ++u) seen[u].assign(ds.sequences[u].size(), 0);
  for (const auto& ex : split.train) {
    const std::size_t n = ds.sequences[ex.user].size();
    // Window [0, length) and target `length` must stay inside the first n-2 items.
    if (ex.length == 0 || ex.length + 2 >= n) return "train leaks";
    if (seen[ex.user][ex.length]++) return "duplicate train pair";
  }
  for (std::size_t u = 0; u < ds.num_users(); ++u) {
    const std::size_t n = ds.sequences[u].size();
    for (std::size_t len = 1; len + 2 < n; ++len) {
      if (!seen[u][len]) return "missing train pair";
    }
  }
  // Batches drawn from the training view never include held-out items.
  for (const auto& b : data::make_batches(ds, split.train, 1000, 512)) {
    for (std::size_t i = 0; i < b.batch; ++i) {
      const auto& ex = split.train[b.example_ids[i]];
      const auto row = b.row(i);
      const auto& seq = ds.sequences[ex.user];
      for (std::size_t t = 0; t < ex.length; ++t) {
        if (row[b.steps - ex.length + t] != seq[t]) return "batch window mismatch";
      }
      if (b.targets[i] != seq[ex.length]) return "batch target mismatch";
    }
  }
  return "";
}

Outcome protocol() {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "glint_acceptance_log.tsv";
  {
    Rng rng(8);
    std::ofstream out(path);
    out << "user\titem\tts\n";
    for (int row = 0; row < 6000; ++row) {
      out << "u" << uniform_index(rng, 400) << '\t' << "i" << uniform_index(rng, 300) << '\t'
          << uniform_index(rng, 100000) << '\n';
    }
  }
  std::vector<std::pair<std::string, data::InteractionDataset>> sets = {
      {"random log", data::ingest(path)}, {"synth", data::synth_cyclic(50, 500, 30, 1)}};
  fs::remove(path);
  if (const char* ml = std::getenv("GLINT_ML1M_RATINGS")) sets.emplace_back("ml-1m", data::ingest(ml));
  std::string detail;
  bool ok = true;
  for (const auto& [name, ds] : sets) {
    const std::string err = check_protocol(ds);
    ok = ok && err.empty();
    detail += (detail.empty() ? "" : "; ") + name + " (" + std::to_string(ds.num_users()) +
              " users, " + std::to_string(ds.dropped_users) + " dropped): " +
              (err.empty() ? "ok" : err);
  }
  return verdict(ok, detail);
}

// --- 9. ML-1M statistics ----------------------------------------------------

Outcome ml1m() {
  const char* path = std::getenv("GLINT_ML1M_RATINGS");
  if (!path) return {Outcome::kSkip, "set GLINT_ML1M_RATINGS to ratings.dat to run"};
  const auto ds = data::ingest(path);
  const auto j = data::to_json(ds.stats());
  const double avg = j["avg_length"], sparsity = j["sparsity"];
  const bool ok = j["user_slots"] == 6041 && j["item_slots"] == 3707 &&
                  j["num_interactions"] == 1000209 &&
                  std::round(avg * 100) / 100 == 165.60 &&
                  std::round(sparsity * 10000) / 100 == 95.53;
  return verdict(ok, j.dump());
}

// --- 10. ablation -----------------------------------------------------------

Outcome ablation() {
  const auto ds = data::synth_cyclic(50, 200, 20, 2);
  const auto split = data::leave_one_out_split(ds);
  model::ModelConfig base;
  base.vocab_size = ds.vocab_size();
  base.hidden = 32;
  base.kernel = 3;
  base.heads = 2;
  base.layers = 1;
  base.dropout = 0.2;
  base.max_len = 20;
  training::TrainConfig tc;
  tc.batch_size = 64;
  tc.eval_batch_size = 512;
  tc.max_epochs = 10;
  tc.patience = 10;
  tc.exclude_seen = false;
  const auto results = bench::ablation_run(ds, split, base, tc);
  bool ok = results.size() == 5;
  std::string detail;
  for (const auto& r : results) {
    const bool trained = r.error.empty() && r.log.epochs.size() == 10;
    const double drop = trained ? 1.0 - r.last_loss() / r.first_loss() : 0.0;
    ok = ok && trained && drop >= kMinLossDrop && r.test.num_examples == ds.num_users();
    detail += std::string(model::variant_name(r.variant)) + ": " +
              (trained ? "drop " + fmt("%.0f", 100 * drop) + "% ndcg " + fmt("%.3f", r.test.ndcg)
                       : "error " + r.error) +
              "; ";
  }
  // The Light path returns its input untouched.
  const model::GlintModel light(model::apply_variant(base, model::Variant::kNoGatedMlp), 1);
  Rng rng(3);
  const Tensor z = random_tensor({2, 4, 32}, rng);
  num::Tape tape(false);
  const bool identity =
      light.gated_mlp_block(tape, Var::constant(z), 0, nullptr, true, rng).value() == z;
  ok = ok && identity;
  detail += identity ? "light block R = Z" : "light block altered Z";
  return verdict(ok, detail);
}

// --- 11. determinism --------------------------------------------------------

Outcome determinism() {
  const std::vector<const char*> argv = {
      "glint", "train", "--synth_items", "50", "--synth_users", "100", "--synth_length", "20",
      "--epochs", "3", "--seed", "5"};
  auto run = [&] {
    std::ostringstream out, err;
    const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::pair{code, out.str()};
  };
  const auto [c1, a] = run();
  const auto [c2, b] = run();
  const auto metrics = [](const std::string& s) {
    const auto j = nlohmann::json::parse(s)["result"];
    return nlohmann::json{{"valid", j["valid"]}, {"test", j["test"]}}.dump();
  };
  const bool ok = c1 == 0 && c2 == 0 && a == b && metrics(a) == metrics(b);
  return verdict(ok, ok ? "identical " + std::to_string(a.size()) + "-byte outputs, test " +
                              metrics(a)
                        : "outputs differ or exit codes " + std::to_string(c1) + "/" +
                              std::to_string(c2));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"linear attention associativity", associativity},
      {"GRU decomposition identity", decomposition},
      {"learnability at desk scale", learnability},
      {"complexity scaling", scaling},
      {"kernel-size stability", kernel_stability},
      {"metric oracles", metrics},
      {"protocol correctness", protocol},
      {"ML-1M statistics", ml1m},
      {"ablation matrix", ablation},
      {"determinism", determinism},
  };
  // Optional arguments pick criteria by number.
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n >= 1 && n <= static_cast<int>(criteria.size())) selected[n - 1] = true;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.status == Outcome::kFail) ++failures;
    std::cout << tag << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << criteria[i].first
              << ": " << o.detail << " (" << fmt("%.1f", secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
