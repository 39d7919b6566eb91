// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "glint/numerics/tensor.hpp"

namespace glint::num {

/// Storage behind a Var: a value plus a lazily allocated gradient accumulator.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;

  explicit Node(Tensor v, bool trainable = false)
      : value(std::move(v)), requires_grad(trainable) {}

  bool has_grad() const { return !grad.empty(); }
  /// Adds `g` into grad, allocating zeros on first use.
  void accumulate(const Tensor& g);
  void zero_grad() { grad = Tensor(); }
};

using NodePtr = std::shared_ptr<Node>;

class Tape;

/// Handle to a value participating in a computation. Cheap to copy.
class Var {
 public:
  Var() = default;
  Var(NodePtr node, Tape* tape) : node_(std::move(node)), tape_(tape) {}

  /// Value with no tape and no gradient.
  static Var constant(Tensor value);

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t axis) const { return node_->value.dim(axis); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  /// Gradient after Tape::backward; empty tensor if none flowed here.
  const Tensor& grad() const { return node_->grad; }

  const NodePtr& node() const { return node_; }
  Tape* tape() const { return tape_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  NodePtr node_;
  Tape* tape_ = nullptr;
};

/// Records executed ops in order; backward replays them in reverse.
///
/// A tape is single-use and confined to one thread. Vars created through a
/// tape must not outlive it. With recording disabled, ops still compute
/// values but nothing is stored and no gradients are produced.
class Tape {
 public:
  using Backward = std::function<void(const Tensor& grad_out)>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  /// Fresh trainable leaf owned by the caller's Var.
  Var leaf(Tensor value);
  /// Non-differentiable input bound to this tape.
  Var constant(Tensor value);
  /// Persistent parameter; gradients accumulate into `node->grad`.
  Var param(const NodePtr& node);

  /// Wraps an op result. When recording and any input requires grad the
  /// result requires grad and `backward` is queued. Throws NonFiniteError
  /// if `value` holds NaN or Inf.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs,
             Backward backward);

  /// Seeds d(loss)=1 for a single-element `loss` and runs every recorded op
  /// once in reverse execution order. Returns the number of ops visited.
  std::size_t backward(const Var& loss);

  std::size_t size() const { return records_.size(); }

 private:
  struct Record {
    std::string op;
    NodePtr out;
    Backward backward;
  };

  bool recording_;
  bool consumed_ = false;
  std::vector<Record> records_;
};

/// Builds an op result on whichever tape the inputs belong to (or as a
/// detached constant when none do). Custom fused ops use this.
Var make_op(const char* op, Tensor value, std::initializer_list<Var> inputs,
            Tape::Backward backward);

/// Adds `g` to v's gradient when v requires one.
void accumulate_grad(const Var& v, const Tensor& g);

}  // namespace glint::num
