// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/param_store.hpp"

#include <algorithm>
#include <stdexcept>

#include "glint/numerics/errors.hpp"

namespace glint::num {

NodePtr ParamStore::add(std::string name, Tensor value, bool trainable) {
  if (contains(name)) throw std::invalid_argument("param store: duplicate name '" + name + "'");
  auto node = std::make_shared<Node>(std::move(value), trainable);
  entries_.emplace_back(std::move(name), node);
  return node;
}

const NodePtr& ParamStore::get(const std::string& name) const {
  for (const auto& [n, node] : entries_)
    if (n == name) return node;
  throw std::out_of_range("param store: no parameter named '" + name + "'");
}

bool ParamStore::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.first == name; });
}

std::size_t ParamStore::num_values() const {
  std::size_t total = 0;
  for (const auto& [name, node] : entries_) total += node->value.size();
  return total;
}

void ParamStore::zero_grad() {
  for (auto& [name, node] : entries_) node->zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore copy;
  for (const auto& [name, node] : entries_) copy.add(name, node->value, node->requires_grad);
  return copy;
}

void ParamStore::assign(const ParamStore& other) {
  if (other.size() != size()) throw ShapeError("param store: parameter count mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& [name, node] = entries_[i];
    const auto& [oname, onode] = other.entries_[i];
    if (name != oname || node->value.shape() != onode->value.shape()) {
      throw ShapeError("param store: cannot assign '" + oname + "' " +
                       shape_string(onode->value.shape()) + " to '" + name + "' " +
                       shape_string(node->value.shape()));
    }
    node->value = onode->value;
  }
}

}  // namespace glint::num
