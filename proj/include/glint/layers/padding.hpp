// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace glint::layers {

/// Validity of each (sequence, step) row in a left-padded [B,N,·] batch:
/// sequence b occupies the last lengths[b] steps.
class PaddingMask {
 public:
  PaddingMask(std::size_t steps, std::vector<std::size_t> lengths);

  std::size_t batch() const { return lengths_.size(); }
  std::size_t steps() const { return steps_; }
  std::span<const std::size_t> lengths() const { return lengths_; }
  /// One 0/1 entry per row, row index b·N + t.
  std::span<const double> rows() const { return rows_; }
  bool valid(std::size_t b, std::size_t t) const { return t + lengths_[b] >= steps_; }

 private:
  std::size_t steps_;
  std::vector<std::size_t> lengths_;
  std::vector<double> rows_;
};

}  // namespace glint::layers
