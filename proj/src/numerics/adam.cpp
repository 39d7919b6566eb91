// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "glint/numerics/errors.hpp"

namespace glint::num {

void adam_update(Tensor& param, const Tensor& grad, Tensor& first_moment, Tensor& second_moment,
                 std::uint64_t step, const AdamOptions& o) {
  require_same_shape(param, grad, "adam: param/grad");
  require_same_shape(param, first_moment, "adam: param/first moment");
  require_same_shape(param, second_moment, "adam: param/second moment");
  if (step == 0) throw std::invalid_argument("adam: step index is 1-based");
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] + o.weight_decay * param[i];
    first_moment[i] = o.beta1 * first_moment[i] + (1.0 - o.beta1) * g;
    second_moment[i] = o.beta2 * second_moment[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = first_moment[i] / c1;
    const double v_hat = second_moment[i] / c2;
    param[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

Adam::Adam(const ParamStore& params, AdamOptions options) : options_(options) {
  if (!(options_.lr >= 0.0)) throw std::invalid_argument("adam: learning rate must be >= 0");
  for (const auto& [name, node] : params) {
    first_.emplace_back(node->value.shape());
    second_.emplace_back(node->value.shape());
  }
}

void Adam::step(ParamStore& params) {
  if (params.size() != first_.size()) throw ShapeError("adam: parameter layout changed");
  for (const auto& [name, node] : params) {
    if (node->has_grad() && !node->grad.all_finite()) {
      throw NonFiniteError("adam: non-finite gradient for '" + name + "'");
    }
  }
  ++steps_;
  std::size_t i = 0;
  for (const auto& [name, node] : params) {
    if (node->requires_grad && node->has_grad()) {
      adam_update(node->value, node->grad, first_[i], second_[i], steps_, options_);
    }
    ++i;
  }
}

}  // namespace glint::num
