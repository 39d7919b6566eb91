// SPDX-License-Identifier: Apache-2.0
#include "glint/eval/metrics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace glint::eval {

nlohmann::json to_json(const MetricsReport& m) {
  const std::string k = std::to_string(m.k);
  return {{"k", m.k},
          {"recall@" + k, m.recall},
          {"mrr@" + k, m.mrr},
          {"ndcg@" + k, m.ndcg},
          {"num_examples", m.num_examples}};
}

namespace {

std::size_t rank_with_mask(std::span<const double> scores, std::int32_t target,
                           const std::vector<char>& excluded) {
  const auto t = static_cast<std::size_t>(target);
  const double st = scores[t];
  std::size_t ahead = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == t || excluded[i]) continue;
    if (scores[i] > st || (scores[i] == st && i < t)) ++ahead;
  }
  return ahead + 1;
}

}  // namespace

std::size_t rank_of_target(std::span<const double> scores, std::int32_t target,
                           std::span<const std::int32_t> exclude) {
  if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) {
    throw std::out_of_range("rank_of_target: target " + std::to_string(target) +
                            " outside catalog of " + std::to_string(scores.size()));
  }
  std::vector<char> excluded(scores.size(), 0);
  for (std::int32_t e : exclude) {
    if (e == target) {
      throw std::invalid_argument("rank_of_target: target " + std::to_string(target) +
                                  " is excluded");
    }
    if (e >= 0 && static_cast<std::size_t>(e) < scores.size()) excluded[e] = 1;
  }
  return rank_with_mask(scores, target, excluded);
}

MetricsReport metrics_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (k < 1) throw std::invalid_argument("metrics_at_k: K must be at least 1");
  MetricsReport m;
  m.k = k;
  m.num_examples = ranks.size();
  if (ranks.empty()) return m;
  for (std::size_t r : ranks) {
    if (r < 1) throw std::invalid_argument("metrics_at_k: ranks are 1-based");
    if (r > k) continue;
    m.recall += 1.0;
    m.mrr += 1.0 / static_cast<double>(r);
    m.ndcg += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  const double n = static_cast<double>(ranks.size());
  m.recall /= n;
  m.mrr /= n;
  m.ndcg /= n;
  return m;
}

EvalResult evaluate(const model::GlintModel& model, const data::InteractionDataset& ds,
                    std::span<const data::Example> view, const EvalConfig& cfg) {
  if (view.empty()) throw std::invalid_argument("evaluate: empty view");
  EvalResult out;
  out.ranks.assign(view.size(), 0);
  Rng unused(0);
  data::BatchStream stream(ds, view, model.config().max_len, cfg.batch_size);
  std::vector<char> excluded(model.config().vocab_size, 0);
  while (auto batch = stream.next()) {
    num::Tape tape(/*recording=*/false);
    const num::Tensor scores = model.forward(tape, *batch, false, unused).value();
    const std::size_t v = scores.dim(1);
    for (std::size_t b = 0; b < batch->batch; ++b) {
      const auto row = std::span<const double>(scores.raw() + b * v, v);
      const auto window = batch->row(b);
      excluded[0] = 1;
      if (cfg.exclude_seen) {
        for (std::int32_t i : window) excluded[i] = 1;
      }
      const std::int32_t target = batch->targets[b];
      if (excluded[target]) {
        // The target reappears inside its own window; it stays a candidate.
        excluded[target] = 0;
      }
      out.ranks[batch->example_ids[b]] = rank_with_mask(row, target, excluded);
      for (std::int32_t i : window) excluded[i] = 0;
      excluded[0] = 0;
    }
  }
  out.report = metrics_at_k(out.ranks, cfg.k);
  return out;
}

void write_rank_dump(std::ostream& out, const data::InteractionDataset& ds,
                     std::span<const data::Example> view, std::span<const std::size_t> ranks) {
  for (std::size_t i = 0; i < view.size(); ++i) {
    out << ds.user_ids[view[i].user] << '\t' << ds.item_ids[data::target_of(ds, view[i])] << '\t'
        << ranks[i] << '\n';
  }
}

}  // namespace glint::eval
