// SPDX-License-Identifier: Apache-2.0
#include "glint/attention/attention.hpp"

#include <cmath>
#include <string>

#include "glint/numerics/errors.hpp"

namespace glint::attn {

using num::Var;

namespace {

struct Heads {
  Var q, k, v;  // each [B·h, N, d_h]
  bool was_2d;
};

Heads project(const Var& x, const AttentionParams& p) {
  const auto rank = x.value().rank();
  if (rank != 2 && rank != 3) {
    throw ShapeError("attention: expects [N,d] or [B,N,d], got " + num::shape_string(x.shape()));
  }
  const std::size_t d = x.shape().back();
  if (x.dim(rank - 2) == 0) throw std::invalid_argument("attention: empty sequence");
  if (p.heads == 0 || d % p.heads != 0) {
    throw ShapeError("attention: " + std::to_string(p.heads) + " heads do not divide d=" +
                     std::to_string(d));
  }
  for (const Var* w : {&p.w_query, &p.w_key, &p.w_value}) {
    if (w->shape() != num::Shape{d, d}) {
      throw ShapeError("attention: projection " + num::shape_string(w->shape()) +
                       " is not square in d=" + std::to_string(d));
    }
  }
  const Var x3 = rank == 2 ? num::reshape(x, {1, x.dim(0), d}) : x;
  return {num::split_heads(num::linear(x3, p.w_query), p.heads),
          num::split_heads(num::linear(x3, p.w_key), p.heads),
          num::split_heads(num::linear(x3, p.w_value), p.heads), rank == 2};
}

Var finish(const Var& per_head, const Heads& h, const AttentionParams& p) {
  Var merged = num::merge_heads(per_head, p.heads);
  if (h.was_2d) merged = num::reshape(merged, {merged.dim(1), merged.dim(2)});
  return merged;
}

Var feature_query(const Var& q) {
  return num::l2_normalize(num::activation(q, num::Activation::kElu), num::NormAxis::kRow);
}

Var feature_key(const Var& k) {
  return num::l2_normalize(num::activation(k, num::Activation::kElu), num::NormAxis::kColumn);
}

}  // namespace

Var linear_attention(const Var& x, const AttentionParams& p) {
  const Heads h = project(x, p);
  const Var context = num::bmm(feature_key(h.k), h.v, /*trans_a=*/true);  // [G, d_h, d_h]
  return finish(num::bmm(feature_query(h.q), context), h, p);
}

Var linear_attention_query_first(const Var& x, const AttentionParams& p) {
  const Heads h = project(x, p);
  const Var scores = num::bmm(feature_query(h.q), feature_key(h.k), false, /*trans_b=*/true);
  return finish(num::bmm(scores, h.v), h, p);
}

Var quadratic_softmax_attention(const Var& x, const AttentionParams& p) {
  const Heads h = project(x, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(h.q.dim(2)));
  const Var scores = num::scale(num::bmm(h.q, h.k, false, /*trans_b=*/true), scale);
  return finish(num::bmm(num::softmax_rows(scores), h.v), h, p);
}

}  // namespace glint::attn
