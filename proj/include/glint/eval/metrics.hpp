// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "glint/data/split.hpp"
#include "glint/model/model.hpp"

namespace glint::eval {

struct MetricsReport {
  std::size_t k = 10;
  double recall = 0.0;
  double mrr = 0.0;
  double ndcg = 0.0;
  std::size_t num_examples = 0;

  bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const MetricsReport& m);

/// 1-based rank of `target` among items not in `exclude`, by descending
/// score; equal scores rank the smaller index first.
std::size_t rank_of_target(std::span<const double> scores, std::int32_t target,
                           std::span<const std::int32_t> exclude);

/// Recall, MRR and NDCG (one relevant item, IDCG = 1) truncated at k.
MetricsReport metrics_at_k(std::span<const std::size_t> ranks, std::size_t k);

struct EvalConfig {
  std::size_t k = 10;
  bool exclude_seen = true;  // drop items present in the input window
  std::size_t batch_size = 256;
};

struct EvalResult {
  std::vector<std::size_t> ranks;  // in view order
  MetricsReport report;
};

/// Full-catalog ranking of every example in `view`. The padding item is
/// never a candidate.
EvalResult evaluate(const model::GlintModel& model, const data::InteractionDataset& ds,
                    std::span<const data::Example> view, const EvalConfig& cfg);

/// One "user<TAB>target<TAB>rank" line per example.
void write_rank_dump(std::ostream& out, const data::InteractionDataset& ds,
                     std::span<const data::Example> view, std::span<const std::size_t> ranks);

}  // namespace glint::eval
