// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "glint/numerics/autograd.hpp"

namespace glint::num {

/// Ordered set of named trainable tensors. Registration order is the
/// iteration and serialization order.
class ParamStore {
 public:
  using Entry = std::pair<std::string, NodePtr>;

  NodePtr add(std::string name, Tensor value, bool trainable = true);
  const NodePtr& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t num_values() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  /// Deep copy: fresh nodes with copied values and no gradients.
  ParamStore clone() const;
  /// Overwrites values from `other`; names and shapes must match exactly.
  void assign(const ParamStore& other);

 private:
  std::vector<Entry> entries_;
};

}  // namespace glint::num
