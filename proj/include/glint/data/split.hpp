// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "glint/data/dataset.hpp"

namespace glint::data {

/// One next-item example: the first `length` items of a user's sequence
/// predict the item at position `length`.
struct Example {
  std::uint32_t user = 0;
  std::uint32_t length = 0;

  bool operator==(const Example&) const = default;
};

inline std::int32_t target_of(const InteractionDataset& ds, const Example& ex) {
  return ds.sequences[ex.user][ex.length];
}

/// Leave-one-out views. For [v1..vn]: test predicts vn from v1..v(n-1),
/// validation predicts v(n-1) from v1..v(n-2), and training holds every
/// next-item pair inside v1..v(n-2).
struct SplitViews {
  std::vector<Example> train;
  std::vector<Example> valid;
  std::vector<Example> test;
  std::size_t dropped_users = 0;  // users too short to split
};

SplitViews leave_one_out_split(const InteractionDataset& ds);

/// Counts and per-user lengths, enough to rebuild the split.
nlohmann::json split_manifest(const InteractionDataset& ds, const SplitViews& split);

/// Left-padded index matrix. Row b holds its window in the last
/// lengths[b] of `steps` columns.
struct Batch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::int32_t> items;  // batch * steps
  std::vector<std::size_t> lengths;
  std::vector<std::int32_t> targets;
  std::vector<std::size_t> example_ids;  // positions in the source view

  std::span<const std::int32_t> row(std::size_t b) const {
    return std::span<const std::int32_t>(items).subspan(b * steps, steps);
  }
};

/// Lazily cuts a view into batches. Each window keeps the most recent
/// `max_len` items and the batch is padded to its longest window. With a
/// seed, example order is a seeded shuffle; without, view order.
class BatchStream {
 public:
  BatchStream(const InteractionDataset& ds, std::span<const Example> view, std::size_t max_len,
              std::size_t batch_size, std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  std::optional<Batch> next();
  std::size_t num_batches() const;
  std::size_t num_examples() const { return order_.size(); }

 private:
  const InteractionDataset* ds_;
  std::span<const Example> view_;
  std::size_t max_len_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

/// Materialises every batch of a stream.
std::vector<Batch> make_batches(const InteractionDataset& ds, std::span<const Example> view,
                                std::size_t max_len, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace glint::data
