// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/init.hpp"

#include <cmath>

#include "glint/numerics/errors.hpp"

namespace glint::num {

Tensor xavier_uniform(const Shape& shape, Rng& rng) {
  if (shape.size() != 2) {
    throw ShapeError("xavier_init: expects a 2-D shape, got " + shape_string(shape));
  }
  return xavier_uniform(shape, shape[0], shape[1], rng);
}

Tensor xavier_init(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  return xavier_uniform(shape, rng);
}

Tensor xavier_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  if (fan_in + fan_out == 0) throw ShapeError("xavier_init: zero fan");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(shape);
  for (double& v : t.data()) v = (2.0 * uniform01(rng) - 1.0) * bound;
  return t;
}

}  // namespace glint::num
