// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glint/layers/gru.hpp"
#include "glint/layers/padding.hpp"
#include "glint/layers/temporal_conv.hpp"

namespace glint::layers {

/// Selective gate and channel crossing, all weights [d,d], biases [d].
struct SelectiveGateParams {
  num::Var w_delta, b_delta;  // gate input layer on C
  num::Var w_omega, b_omega;  // gate output layer
  num::Var w_cross, b_cross;  // channel crossing Φ(H) = H·W_H + b_H
  num::Activation activation = num::Activation::kSilu;
};

/// (act(C·W_δ + b_δ)·W_Ω + b_Ω) ⊗ (H·W_H + b_H).
num::Var selective_gate(const num::Var& c, const num::Var& h, const SelectiveGateParams& params);

struct DenseSelectiveGruParams {
  TemporalConvParams input_conv;  // with projection
  num::Var output_kernel;         // [k, d], no projection
  GruParams gru;
  SelectiveGateParams gate;
};

/// Y = conv_out(gate(C, GRU(C))) with C = conv_in(X·W₀ + b₀).
/// With use_temporal_conv = false both convolutions are skipped (the input
/// projection is kept). With a mask, pad rows are zeroed after every stage
/// and the GRU holds h₀ through padding.
num::Var dense_selective_gru(const num::Var& x, const DenseSelectiveGruParams& params,
                             const PaddingMask* mask = nullptr, bool use_temporal_conv = true);

}  // namespace glint::layers
