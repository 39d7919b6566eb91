// SPDX-License-Identifier: Apache-2.0
#include "glint/layers/dense_selective_gru.hpp"

#include "glint/numerics/errors.hpp"

namespace glint::layers {

using num::Var;

Var selective_gate(const Var& c, const Var& h, const SelectiveGateParams& p) {
  if (c.shape() != h.shape()) {
    throw ShapeError("selective_gate: C " + num::shape_string(c.shape()) + " vs H " +
                     num::shape_string(h.shape()));
  }
  const Var gate = num::linear(num::activation(num::linear(c, p.w_delta, p.b_delta), p.activation),
                               p.w_omega, p.b_omega);
  const Var crossed = num::linear(h, p.w_cross, p.b_cross);
  return num::mul(gate, crossed);
}

Var dense_selective_gru(const Var& x, const DenseSelectiveGruParams& p, const PaddingMask* mask,
                        bool use_temporal_conv) {
  auto masked = [mask](const Var& v) { return mask ? num::mask_rows(v, mask->rows()) : v; };

  Var c;
  if (use_temporal_conv) {
    c = temporal_conv1d(x, p.input_conv, /*apply_projection=*/true, mask);
  } else {
    c = masked(num::linear(x, p.input_conv.proj_weight, p.input_conv.proj_bias));
  }
  const std::span<const std::size_t> lengths =
      mask ? mask->lengths() : std::span<const std::size_t>();
  const Var h = gru_sequence(c, p.gru, lengths).hidden;
  const Var g = masked(selective_gate(c, h, p.gate));
  if (!use_temporal_conv) return g;
  return temporal_conv1d(g, TemporalConvParams{p.output_kernel, Var(), Var()},
                         /*apply_projection=*/false, mask);
}

}  // namespace glint::layers
