// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "glint/layers/padding.hpp"
#include "glint/numerics/ops.hpp"

namespace glint::layers {

/// Depthwise temporal convolution: one k-tap kernel per channel, preceded
/// by an optional dense projection x·W₀ + b₀.
struct TemporalConvParams {
  num::Var kernel;       // [k, d], k odd
  num::Var proj_weight;  // [d, d] or empty
  num::Var proj_bias;    // [d] or empty
};

/// Same-length depthwise cross-correlation along the time axis with (k-1)/2
/// zeros on both sides: y[t,c] = Σ_j kernel[j,c]·x[t+j-(k-1)/2, c].
/// Accepts [N,d] or [B,N,d]. Non-causal: step t sees neighbours on both sides.
num::Var depthwise_conv1d(const num::Var& x, const num::Var& kernel);

/// Optional projection, then depthwise_conv1d. When `mask` is given, pad
/// rows are zeroed after the projection and after the convolution.
num::Var temporal_conv1d(const num::Var& x, const TemporalConvParams& params,
                         bool apply_projection, const PaddingMask* mask = nullptr);

}  // namespace glint::layers
