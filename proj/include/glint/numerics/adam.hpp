// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "glint/numerics/param_store.hpp"

namespace glint::num {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// L2 penalty folded into the gradient; 0 disables.
  double weight_decay = 0.0;
};

/// One bias-corrected Adam update of `param` in place. `step` is the
/// 1-based step index after increment.
void adam_update(Tensor& param, const Tensor& grad, Tensor& first_moment, Tensor& second_moment,
                 std::uint64_t step, const AdamOptions& options);

/// Per-parameter moment state bound to a ParamStore's layout.
class Adam {
 public:
  Adam(const ParamStore& params, AdamOptions options);

  /// Applies one update using each parameter's accumulated grad. Parameters
  /// without a gradient are left untouched. Throws NonFiniteError (before
  /// modifying anything) if any gradient holds NaN/Inf.
  void step(ParamStore& params);

  std::uint64_t steps() const { return steps_; }
  const AdamOptions& options() const { return options_; }
  const Tensor& first_moment(std::size_t i) const { return first_[i]; }
  const Tensor& second_moment(std::size_t i) const { return second_[i]; }

 private:
  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
};

}  // namespace glint::num
