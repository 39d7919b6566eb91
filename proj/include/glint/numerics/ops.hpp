// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "glint/numerics/autograd.hpp"
#include "glint/numerics/rng.hpp"

namespace glint::num {

enum class Activation { kSigmoid, kTanh, kElu, kSilu, kGelu, kRelu };

/// Normalization direction: kRow normalizes along the last axis; kColumn
/// along the second-to-last axis, independently for every leading index.
enum class NormAxis { kRow, kColumn };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation kind);

/// Scalar activation and its derivative. ELU uses alpha = 1; GeLU is the
/// exact Gaussian-CDF form.
double activate(Activation kind, double x);
double activate_grad(Activation kind, double x);

// Elementwise, identical shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
/// weights[index] * x, differentiable in both.
Var scale_by(const Var& x, const Var& weights, std::size_t index);
/// x[..., n] + bias[n], broadcast over leading axes.
Var add_bias(const Var& x, const Var& bias);
Var sum_all(const Var& x);

/// 2-D product op(a)·op(b).
Var matmul(const Var& a, const Var& b, bool trans_a = false, bool trans_b = false);
/// Batched product over the leading axis of 3-D operands.
Var bmm(const Var& a, const Var& b, bool trans_a = false, bool trans_b = false);
/// x[..., in]·weight[in×out] (+ bias[out] when given).
Var linear(const Var& x, const Var& weight, const Var& bias = Var());

Var reshape(const Var& x, Shape shape);
Var activation(const Var& x, Activation kind);
/// Softmax along the last axis, max-subtracted.
Var softmax_rows(const Var& x);
/// Unit L2 norm along `axis`; all-zero slices pass through as zeros.
Var l2_normalize(const Var& x, NormAxis axis);

/// [m×p] ++ [m×q] → [m×(p+q)] along the last axis.
Var concat_cols(const Var& a, const Var& b);
/// [B,N,d] → [B·h, N, d/h]: head j takes channels [j·d/h, (j+1)·d/h).
Var split_heads(const Var& x, std::size_t heads);
/// Inverse of split_heads.
Var merge_heads(const Var& x, std::size_t heads);

/// Row lookup table[indices[i]] → [len, d]. Gradient is scattered back into
/// the table except for `frozen_row`, which never receives any.
Var gather_rows(const Var& table, std::span<const std::int32_t> indices,
                std::optional<std::size_t> frozen_row = std::nullopt);
/// Multiplies each row (last-axis slice) by row_mask[row].
Var mask_rows(const Var& x, std::span<const double> row_mask);
/// x[B,N,d] → x[:, t, :] as [B,d].
Var take_step(const Var& x, std::size_t t);

/// Inverted dropout; identity when !training or rate == 0.
Var dropout(const Var& x, double rate, bool training, Rng& rng);

}  // namespace glint::num
