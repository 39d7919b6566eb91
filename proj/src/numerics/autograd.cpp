// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/autograd.hpp"

#include <stdexcept>

#include "glint/numerics/errors.hpp"

namespace glint::num {

void Node::accumulate(const Tensor& g) {
  if (grad.empty()) {
    require_same_shape(value, g, "gradient");
    grad = g;
  } else {
    grad.add_inplace(g);
  }
}

Var Var::constant(Tensor value) {
  return Var(std::make_shared<Node>(std::move(value), false), nullptr);
}

Var Tape::leaf(Tensor value) {
  return Var(std::make_shared<Node>(std::move(value), true), this);
}

Var Tape::constant(Tensor value) {
  return Var(std::make_shared<Node>(std::move(value), false), this);
}

Var Tape::param(const NodePtr& node) { return Var(node, this); }

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs,
                 Backward backward) {
  if (!value.all_finite()) {
    throw NonFiniteError(std::string(op) + ": produced a non-finite value");
  }
  bool needs_grad = false;
  for (const Var& in : inputs) {
    if (in.tape() && in.tape() != this) {
      throw std::logic_error(std::string(op) + ": inputs belong to different tapes");
    }
    needs_grad = needs_grad || in.requires_grad();
  }
  needs_grad = needs_grad && recording_;
  auto out = std::make_shared<Node>(std::move(value), needs_grad);
  if (needs_grad) records_.push_back({op, out, std::move(backward)});
  return Var(std::move(out), this);
}

std::size_t Tape::backward(const Var& loss) {
  if (consumed_) throw std::logic_error("tape: backward already ran");
  if (loss.value().size() != 1) {
    throw ShapeError("tape: backward needs a single-element loss, got " +
                     shape_string(loss.shape()));
  }
  consumed_ = true;
  if (!loss.requires_grad()) return 0;
  loss.node()->accumulate(Tensor(loss.shape(), 1.0));
  std::size_t visited = 0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    ++visited;
    if (!it->out->has_grad()) continue;
    it->backward(it->out->grad);
    // Intermediate gradients are no longer needed once propagated.
    it->out->zero_grad();
  }
  return visited;
}

Var make_op(const char* op, Tensor value, std::initializer_list<Var> inputs,
            Tape::Backward backward) {
  Tape* tape = nullptr;
  for (const Var& in : inputs) {
    if (in && in.tape()) {
      tape = in.tape();
      break;
    }
  }
  if (tape) return tape->record(op, std::move(value), inputs, std::move(backward));
  if (!value.all_finite()) {
    throw NonFiniteError(std::string(op) + ": produced a non-finite value");
  }
  return Var::constant(std::move(value));
}

void accumulate_grad(const Var& v, const Tensor& g) {
  if (v.requires_grad()) v.node()->accumulate(g);
}

}  // namespace glint::num
