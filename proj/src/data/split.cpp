// SPDX-License-Identifier: Apache-2.0
#include "glint/data/split.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "glint/numerics/rng.hpp"

namespace glint::data {

SplitViews leave_one_out_split(const InteractionDataset& ds) {
  SplitViews split;
  for (std::uint32_t u = 0; u < ds.num_users(); ++u) {
    const auto n = static_cast<std::uint32_t>(ds.sequences[u].size());
    if (n < kMinSequenceLength) {
      ++split.dropped_users;
      continue;
    }
    for (std::uint32_t len = 1; len + 1 < n - 1; ++len) split.train.push_back({u, len});
    split.valid.push_back({u, n - 2});
    split.test.push_back({u, n - 1});
  }
  return split;
}

nlohmann::json split_manifest(const InteractionDataset& ds, const SplitViews& split) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& ex : split.test) users.push_back({ds.user_ids[ex.user], ex.length + 1});
  return {{"protocol", "leave-one-out"},
          {"train_examples", split.train.size()},
          {"valid_examples", split.valid.size()},
          {"test_examples", split.test.size()},
          {"dropped_users", split.dropped_users},
          {"users", std::move(users)}};
}

BatchStream::BatchStream(const InteractionDataset& ds, std::span<const Example> view,
                         std::size_t max_len, std::size_t batch_size,
                         std::optional<std::uint64_t> shuffle_seed)
    : ds_(&ds), view_(view), max_len_(max_len), batch_size_(batch_size), order_(view.size()) {
  if (max_len == 0) throw std::invalid_argument("BatchStream: max_len must be at least 1");
  if (batch_size == 0) throw std::invalid_argument("BatchStream: batch_size must be at least 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    shuffle(order_.begin(), order_.end(), rng);
  }
}

std::size_t BatchStream::num_batches() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::optional<Batch> BatchStream::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  Batch b;
  b.batch = end - cursor_;
  for (std::size_t i = cursor_; i < end; ++i) {
    const Example& ex = view_[order_[i]];
    if (ex.length == 0) throw std::invalid_argument("BatchStream: example with empty window");
    b.lengths.push_back(std::min<std::size_t>(ex.length, max_len_));
    b.targets.push_back(target_of(*ds_, ex));
    b.example_ids.push_back(order_[i]);
  }
  b.steps = *std::max_element(b.lengths.begin(), b.lengths.end());
  b.items.assign(b.batch * b.steps, 0);
  for (std::size_t r = 0; r < b.batch; ++r) {
    const Example& ex = view_[b.example_ids[r]];
    const auto& seq = ds_->sequences[ex.user];
    const std::size_t len = b.lengths[r];
    std::copy(seq.begin() + (ex.length - len), seq.begin() + ex.length,
              b.items.begin() + static_cast<std::ptrdiff_t>(r * b.steps + (b.steps - len)));
  }
  cursor_ = end;
  return b;
}

std::vector<Batch> make_batches(const InteractionDataset& ds, std::span<const Example> view,
                                std::size_t max_len, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
  BatchStream stream(ds, view, max_len, batch_size, shuffle_seed);
  std::vector<Batch> out;
  out.reserve(stream.num_batches());
  while (auto b = stream.next()) out.push_back(std::move(*b));
  return out;
}

}  // namespace glint::data
