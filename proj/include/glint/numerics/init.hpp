// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "glint/numerics/rng.hpp"
#include "glint/numerics/tensor.hpp"

namespace glint::num {

/// Glorot/Xavier uniform on ±sqrt(6 / (fan_in + fan_out)) with
/// fan_in = shape[0], fan_out = shape[1]. Shape must be 2-D.
Tensor xavier_uniform(const Shape& shape, Rng& rng);
Tensor xavier_init(const Shape& shape, std::uint64_t seed);

/// Same distribution with explicit fans, for tensors whose layout does not
/// encode them (depthwise kernels).
Tensor xavier_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace glint::num
