// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "glint/numerics/ops.hpp"

namespace glint::layers {

/// GRU weights in row-vector convention. Each weight is [2d, d] and acts on
/// the concatenation [h_{t-1}, x_t]: rows [0, d) multiply the previous
/// hidden state, rows [d, 2d) the input. The candidate weight sees
/// [r_t ⊙ h_{t-1}, x_t]. The initial hidden state is zero.
struct GruParams {
  num::Var w_update, b_update;
  num::Var w_reset, b_reset;
  num::Var w_cand, b_cand;
};

struct GruStep {
  num::Var hidden;   // h_t
  num::Var update;   // z_t
  num::Var cand;     // h̃_t
};

/// One GRU step composed from primitive ops (differentiable in all
/// arguments). x and h_prev are [d] or [B,d].
GruStep gru_cell(const num::Var& x, const num::Var& h_prev, const GruParams& params);

/// Per-step gate values from a scan, [B,N,d] (or [N,d]); zero at pad steps.
struct GruTrace {
  num::Tensor update;
  num::Tensor cand;
};

struct GruSequence {
  num::Var hidden;  // same shape as the input
  GruTrace trace;
};

/// Left-to-right scan from h₀ = 0 over [N,d] or [B,N,d] input, as a single
/// op with hand-written backpropagation through time. With `lengths`, the
/// first N - lengths[b] steps of sequence b are padding: the state stays at
/// h₀ there and those steps output zeros.
GruSequence gru_sequence(const num::Var& c, const GruParams& params,
                         std::span<const std::size_t> lengths = {});

}  // namespace glint::layers
