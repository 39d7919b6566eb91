// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "glint/numerics/ops.hpp"

namespace glint::attn {

/// Square query/key/value projections (no bias) split into `heads` blocks
/// of d/heads channels.
struct AttentionParams {
  num::Var w_query;
  num::Var w_key;
  num::Var w_value;
  std::size_t heads = 1;
};

/// Per head: rowL2(elu(Q)) · (colL2(elu(K))ᵀ · V), evaluated key-first so
/// the cost is O(N·d_h²). Heads are concatenated; there is no output
/// projection and no causal mask. Input is [N,d] or [B,N,d]; rows of X
/// that are exactly zero (padding) contribute nothing to any position.
num::Var linear_attention(const num::Var& x, const AttentionParams& params);

/// Same map evaluated query-first, (rowL2(elu(Q))·colL2(elu(K))ᵀ)·V, at
/// O(N²·d_h) cost. Exists to check associativity.
num::Var linear_attention_query_first(const num::Var& x, const AttentionParams& params);

/// softmax(Q·Kᵀ/√d_h)·V per head. Quadratic baseline for benchmarks only.
num::Var quadratic_softmax_attention(const num::Var& x, const AttentionParams& params);

}  // namespace glint::attn
