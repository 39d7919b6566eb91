// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "glint/numerics/errors.hpp"
#include "glint/numerics/gemm.hpp"

namespace glint::num {
namespace {

Var emit(const char* op, Tensor value, std::initializer_list<Var> inputs,
         Tape::Backward backward) {
  return make_op(op, std::move(value), inputs, std::move(backward));
}

void push_grad(const Var& v, const Tensor& g) { accumulate_grad(v, g); }

void require_same(const Var& a, const Var& b, const char* op) {
  require_same_shape(a.value(), b.value(), op);
}

std::size_t last_dim(const Tensor& t, const char* op) {
  if (t.rank() == 0) throw ShapeError(std::string(op) + ": scalar input");
  return t.shape().back();
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "elu") return Activation::kElu;
  if (name == "silu") return Activation::kSilu;
  if (name == "gelu") return Activation::kGelu;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation kind) {
  switch (kind) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kElu: return "elu";
    case Activation::kSilu: return "silu";
    case Activation::kGelu: return "gelu";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kTanh: return std::tanh(x);
    case Activation::kElu: return x > 0 ? x : std::expm1(x);
    case Activation::kSilu: return x * sigmoid(x);
    case Activation::kGelu: return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2));
    case Activation::kRelu: return x > 0 ? x : 0.0;
  }
  return 0.0;
}

double activate_grad(Activation kind, double x) {
  switch (kind) {
    case Activation::kSigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kElu: return x > 0 ? 1.0 : std::exp(x);
    case Activation::kSilu: {
      const double s = sigmoid(x);
      return s * (1.0 + x * (1.0 - s));
    }
    case Activation::kGelu: {
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2));
      const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
      return cdf + x * pdf;
    }
    case Activation::kRelu: return x > 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  out.add_inplace(b.value());
  return emit("add", std::move(out), {a, b}, [a, b](const Tensor& g) {
    push_grad(a, g);
    push_grad(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return emit("sub", std::move(out), {a, b}, [a, b](const Tensor& g) {
    push_grad(a, g);
    if (b.requires_grad()) {
      Tensor neg = g;
      for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
      push_grad(b, neg);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return emit("mul", std::move(out), {a, b}, [a, b](const Tensor& g) {
    if (a.requires_grad()) {
      Tensor ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
      push_grad(a, ga);
    }
    if (b.requires_grad()) {
      Tensor gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
      push_grad(b, gb);
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  return emit("scale", std::move(out), {x}, [x, factor](const Tensor& g) {
    Tensor gx = g;
    for (double& v : gx.data()) v *= factor;
    push_grad(x, gx);
  });
}

Var scale_by(const Var& x, const Var& weights, std::size_t index) {
  if (index >= weights.value().size()) {
    throw ShapeError("scale_by: weight index " + std::to_string(index) + " out of range");
  }
  const double w = weights.value()[index];
  Tensor out = x.value();
  for (double& v : out.data()) v *= w;
  return emit("scale_by", std::move(out), {x, weights}, [x, weights, index](const Tensor& g) {
    const double w = weights.value()[index];
    if (x.requires_grad()) {
      Tensor gx = g;
      for (double& v : gx.data()) v *= w;
      push_grad(x, gx);
    }
    if (weights.requires_grad()) {
      double dw = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dw += g[i] * x.value()[i];
      Tensor gw(weights.shape());
      gw[index] = dw;
      push_grad(weights, gw);
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  const std::size_t n = last_dim(x.value(), "add_bias");
  if (bias.value().rank() != 1 || bias.value().size() != n) {
    throw ShapeError("add_bias: bias " + shape_string(bias.shape()) + " does not match " +
                     shape_string(x.shape()));
  }
  Tensor out = x.value();
  const std::size_t rows = out.size() / n;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] += bias.value()[c];
  return emit("add_bias", std::move(out), {x, bias}, [x, bias, n, rows](const Tensor& g) {
    push_grad(x, g);
    if (bias.requires_grad()) {
      Tensor gb({n});
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
      push_grad(bias, gb);
    }
  });
}

Var sum_all(const Var& x) {
  Tensor out({1}, x.value().sum());
  return emit("sum_all", std::move(out), {x}, [x](const Tensor& g) {
    push_grad(x, Tensor(x.shape(), g[0]));
  });
}

Var matmul(const Var& a, const Var& b, bool trans_a, bool trans_b) {
  if (a.value().rank() != 2 || b.value().rank() != 2) {
    throw ShapeError("matmul: expects 2-D operands, got " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
  const std::size_t m = trans_a ? a.dim(1) : a.dim(0);
  const std::size_t p = trans_a ? a.dim(0) : a.dim(1);
  const std::size_t pb = trans_b ? b.dim(1) : b.dim(0);
  const std::size_t n = trans_b ? b.dim(0) : b.dim(1);
  if (p != pb) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_string(a.shape()) +
                     (trans_a ? "ᵀ" : "") + " · " + shape_string(b.shape()) +
                     (trans_b ? "ᵀ" : ""));
  }
  Tensor out({m, n});
  gemm(a.value().raw(), b.value().raw(), out.raw(), m, p, n, trans_a, trans_b, false);
  return emit("matmul", std::move(out), {a, b},
              [a, b, m, p, n, trans_a, trans_b](const Tensor& g) {
                if (a.requires_grad()) {
                  Tensor ga(a.shape());
                  if (!trans_a) {
                    // dA = G·op(B)ᵀ
                    gemm(g.raw(), b.value().raw(), ga.raw(), m, n, p, false, !trans_b, false);
                  } else {
                    // A is p×m: dA = op(B)·Gᵀ
                    gemm(b.value().raw(), g.raw(), ga.raw(), p, n, m, trans_b, true, false);
                  }
                  push_grad(a, ga);
                }
                if (b.requires_grad()) {
                  Tensor gb(b.shape());
                  if (!trans_b) {
                    // dB = op(A)ᵀ·G
                    gemm(a.value().raw(), g.raw(), gb.raw(), p, m, n, !trans_a, false, false);
                  } else {
                    // B is n×p: dB = Gᵀ·op(A)
                    gemm(g.raw(), a.value().raw(), gb.raw(), n, m, p, true, trans_a, false);
                  }
                  push_grad(b, gb);
                }
              });
}

Var bmm(const Var& a, const Var& b, bool trans_a, bool trans_b) {
  if (a.value().rank() != 3 || b.value().rank() != 3 || a.dim(0) != b.dim(0)) {
    throw ShapeError("bmm: expects 3-D operands with equal batch, got " +
                     shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  const std::size_t batch = a.dim(0);
  const std::size_t m = trans_a ? a.dim(2) : a.dim(1);
  const std::size_t p = trans_a ? a.dim(1) : a.dim(2);
  const std::size_t pb = trans_b ? b.dim(2) : b.dim(1);
  const std::size_t n = trans_b ? b.dim(1) : b.dim(2);
  if (p != pb) {
    throw ShapeError("bmm: inner dimensions disagree, " + shape_string(a.shape()) + " · " +
                     shape_string(b.shape()));
  }
  const std::size_t sa = m * p;
  const std::size_t sb = p * n;
  const std::size_t sc = m * n;
  Tensor out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    gemm(a.value().raw() + i * sa, b.value().raw() + i * sb, out.raw() + i * sc, m, p, n,
         trans_a, trans_b, false);
  }
  return emit("bmm", std::move(out), {a, b},
              [a, b, batch, m, p, n, sa, sb, sc, trans_a, trans_b](const Tensor& g) {
                if (a.requires_grad()) {
                  Tensor ga(a.shape());
                  for (std::size_t i = 0; i < batch; ++i) {
                    const double* gi = g.raw() + i * sc;
                    const double* bi = b.value().raw() + i * sb;
                    double* out_i = ga.raw() + i * sa;
                    if (!trans_a) {
                      gemm(gi, bi, out_i, m, n, p, false, !trans_b, false);
                    } else {
                      gemm(bi, gi, out_i, p, n, m, trans_b, true, false);
                    }
                  }
                  push_grad(a, ga);
                }
                if (b.requires_grad()) {
                  Tensor gb(b.shape());
                  for (std::size_t i = 0; i < batch; ++i) {
                    const double* gi = g.raw() + i * sc;
                    const double* ai = a.value().raw() + i * sa;
                    double* out_i = gb.raw() + i * sb;
                    if (!trans_b) {
                      gemm(ai, gi, out_i, p, m, n, !trans_a, false, false);
                    } else {
                      gemm(gi, ai, out_i, n, m, p, true, trans_a, false);
                    }
                  }
                  push_grad(b, gb);
                }
              });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  if (weight.value().rank() != 2) throw ShapeError("linear: weight must be 2-D");
  const std::size_t in = last_dim(x.value(), "linear");
  if (weight.dim(0) != in) {
    throw ShapeError("linear: input " + shape_string(x.shape()) + " vs weight " +
                     shape_string(weight.shape()));
  }
  const Shape in_shape = x.shape();
  const Var flat = in_shape.size() == 2 ? x : reshape(x, {x.value().size() / in, in});
  Var y = matmul(flat, weight);
  if (bias) y = add_bias(y, bias);
  if (in_shape.size() == 2) return y;
  Shape out_shape = in_shape;
  out_shape.back() = weight.dim(1);
  return reshape(y, std::move(out_shape));
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return emit("reshape", std::move(out), {x}, [x](const Tensor& g) {
    push_grad(x, g.reshaped(x.shape()));
  });
}

Var activation(const Var& x, Activation kind) {
  Tensor out = x.value();
  for (double& v : out.data()) v = activate(kind, v);
  return emit("activation", std::move(out), {x}, [x, kind](const Tensor& g) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= activate_grad(kind, x.value()[i]);
    push_grad(x, gx);
  });
}

Var softmax_rows(const Var& x) {
  const std::size_t n = last_dim(x.value(), "softmax_rows");
  Tensor out = x.value();
  const std::size_t rows = n ? out.size() / n : 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.raw() + r * n;
    const double mx = *std::max_element(row, row + n);
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = std::exp(row[c] - mx);
      total += row[c];
    }
    for (std::size_t c = 0; c < n; ++c) row[c] /= total;
  }
  Tensor y = out;
  return emit("softmax_rows", std::move(out), {x}, [x, y = std::move(y), n, rows](const Tensor& g) {
    Tensor gx(x.shape());
    for (std::size_t r = 0; r < rows; ++r) {
      const double* yr = y.raw() + r * n;
      const double* gr = g.raw() + r * n;
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) dot += yr[c] * gr[c];
      for (std::size_t c = 0; c < n; ++c) gx[r * n + c] = yr[c] * (gr[c] - dot);
    }
    push_grad(x, gx);
  });
}

Var l2_normalize(const Var& x, NormAxis axis) {
  const Tensor& in = x.value();
  if (in.rank() < 2) throw ShapeError("l2_normalize: expects at least 2-D input");
  const std::size_t cols = in.shape()[in.rank() - 1];
  const std::size_t rows = in.shape()[in.rank() - 2];
  const std::size_t batch = rows * cols != 0 ? in.size() / (rows * cols) : 0;
  // A slice is a run of `len` values spaced `stride` apart.
  const bool by_row = axis == NormAxis::kRow;
  const std::size_t len = by_row ? cols : rows;
  const std::size_t stride = by_row ? 1 : cols;
  const std::size_t per_batch = by_row ? rows : cols;
  auto slice_start = [=](std::size_t b, std::size_t s) {
    return b * rows * cols + (by_row ? s * cols : s);
  };

  Tensor out = in;
  Tensor norms({batch * per_batch});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t s = 0; s < per_batch; ++s) {
      const std::size_t base = slice_start(b, s);
      double sq = 0.0;
      for (std::size_t i = 0; i < len; ++i) sq += in[base + i * stride] * in[base + i * stride];
      const double norm = std::sqrt(sq);
      norms[b * per_batch + s] = norm;
      if (norm > 0.0)
        for (std::size_t i = 0; i < len; ++i) out[base + i * stride] /= norm;
    }
  }
  Tensor y = out;
  return emit("l2_normalize", std::move(out), {x},
              [x, y = std::move(y), norms = std::move(norms), batch, per_batch, len, stride,
               slice_start](const Tensor& g) {
                Tensor gx(x.shape());
                for (std::size_t b = 0; b < batch; ++b) {
                  for (std::size_t s = 0; s < per_batch; ++s) {
                    const double norm = norms[b * per_batch + s];
                    if (norm == 0.0) continue;
                    const std::size_t base = slice_start(b, s);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < len; ++i)
                      dot += y[base + i * stride] * g[base + i * stride];
                    for (std::size_t i = 0; i < len; ++i) {
                      const std::size_t k = base + i * stride;
                      gx[k] = (g[k] - y[k] * dot) / norm;
                    }
                  }
                }
                push_grad(x, gx);
              });
}

Var concat_cols(const Var& a, const Var& b) {
  if (a.value().rank() != 2 || b.value().rank() != 2 || a.dim(0) != b.dim(0)) {
    throw ShapeError("concat_cols: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), p = a.dim(1), q = b.dim(1);
  Tensor out({m, p + q});
  for (std::size_t r = 0; r < m; ++r) {
    std::copy_n(a.value().raw() + r * p, p, out.raw() + r * (p + q));
    std::copy_n(b.value().raw() + r * q, q, out.raw() + r * (p + q) + p);
  }
  return emit("concat_cols", std::move(out), {a, b}, [a, b, m, p, q](const Tensor& g) {
    if (a.requires_grad()) {
      Tensor ga({m, p});
      for (std::size_t r = 0; r < m; ++r) std::copy_n(g.raw() + r * (p + q), p, ga.raw() + r * p);
      push_grad(a, ga);
    }
    if (b.requires_grad()) {
      Tensor gb({m, q});
      for (std::size_t r = 0; r < m; ++r)
        std::copy_n(g.raw() + r * (p + q) + p, q, gb.raw() + r * q);
      push_grad(b, gb);
    }
  });
}

namespace {

// Moves head blocks between [B,N,h·dh] and [B·h,N,dh] layouts.
void permute_heads(const Tensor& src, Tensor& dst, std::size_t batch, std::size_t steps,
                   std::size_t heads, std::size_t head_dim, bool to_heads) {
  const std::size_t d = heads * head_dim;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t n = 0; n < steps; ++n)
      for (std::size_t j = 0; j < heads; ++j) {
        const std::size_t flat = (b * steps + n) * d + j * head_dim;
        const std::size_t split = ((b * heads + j) * steps + n) * head_dim;
        if (to_heads) {
          std::copy_n(src.raw() + flat, head_dim, dst.raw() + split);
        } else {
          std::copy_n(src.raw() + split, head_dim, dst.raw() + flat);
        }
      }
}

}  // namespace

Var split_heads(const Var& x, std::size_t heads) {
  if (x.value().rank() != 3) throw ShapeError("split_heads: expects [B,N,d]");
  const std::size_t batch = x.dim(0), steps = x.dim(1), d = x.dim(2);
  if (heads == 0 || d % heads != 0) {
    throw ShapeError("split_heads: " + std::to_string(heads) + " heads do not divide d=" +
                     std::to_string(d));
  }
  const std::size_t hd = d / heads;
  Tensor out({batch * heads, steps, hd});
  permute_heads(x.value(), out, batch, steps, heads, hd, true);
  return emit("split_heads", std::move(out), {x}, [x, batch, steps, heads, hd](const Tensor& g) {
    Tensor gx(x.shape());
    permute_heads(g, gx, batch, steps, heads, hd, false);
    push_grad(x, gx);
  });
}

Var merge_heads(const Var& x, std::size_t heads) {
  if (x.value().rank() != 3 || heads == 0 || x.dim(0) % heads != 0) {
    throw ShapeError("merge_heads: leading axis " + shape_string(x.shape()) +
                     " not divisible by heads");
  }
  const std::size_t batch = x.dim(0) / heads, steps = x.dim(1), hd = x.dim(2);
  Tensor out({batch, steps, heads * hd});
  permute_heads(x.value(), out, batch, steps, heads, hd, false);
  return emit("merge_heads", std::move(out), {x}, [x, batch, steps, heads, hd](const Tensor& g) {
    Tensor gx(x.shape());
    permute_heads(g, gx, batch, steps, heads, hd, true);
    push_grad(x, gx);
  });
}

Var gather_rows(const Var& table, std::span<const std::int32_t> indices,
                std::optional<std::size_t> frozen_row) {
  if (table.value().rank() != 2) throw ShapeError("gather_rows: table must be 2-D");
  const std::size_t rows = table.dim(0), d = table.dim(1);
  std::vector<std::int32_t> idx(indices.begin(), indices.end());
  Tensor out({idx.size(), d});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= rows) {
      throw std::out_of_range("gather_rows: index " + std::to_string(idx[i]) +
                              " outside table of " + std::to_string(rows) + " rows");
    }
    std::copy_n(table.value().raw() + idx[i] * d, d, out.raw() + i * d);
  }
  return emit("gather_rows", std::move(out), {table},
              [table, idx = std::move(idx), d, frozen_row](const Tensor& g) {
                Tensor gt(table.shape());
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  const auto row = static_cast<std::size_t>(idx[i]);
                  if (frozen_row && row == *frozen_row) continue;
                  for (std::size_t c = 0; c < d; ++c) gt[row * d + c] += g[i * d + c];
                }
                push_grad(table, gt);
              });
}

Var mask_rows(const Var& x, std::span<const double> row_mask) {
  const std::size_t n = last_dim(x.value(), "mask_rows");
  const std::size_t rows = n ? x.value().size() / n : 0;
  if (row_mask.size() != rows) {
    throw ShapeError("mask_rows: " + std::to_string(row_mask.size()) + " mask entries for " +
                     std::to_string(rows) + " rows");
  }
  std::vector<double> mask(row_mask.begin(), row_mask.end());
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] *= mask[r];
  return emit("mask_rows", std::move(out), {x}, [x, mask = std::move(mask), n](const Tensor& g) {
    Tensor gx = g;
    for (std::size_t r = 0; r < mask.size(); ++r)
      for (std::size_t c = 0; c < n; ++c) gx[r * n + c] *= mask[r];
    push_grad(x, gx);
  });
}

Var take_step(const Var& x, std::size_t t) {
  if (x.value().rank() != 3 || t >= x.dim(1)) {
    throw ShapeError("take_step: step " + std::to_string(t) + " invalid for " +
                     shape_string(x.shape()));
  }
  const std::size_t batch = x.dim(0), steps = x.dim(1), d = x.dim(2);
  Tensor out({batch, d});
  for (std::size_t b = 0; b < batch; ++b)
    std::copy_n(x.value().raw() + (b * steps + t) * d, d, out.raw() + b * d);
  return emit("take_step", std::move(out), {x}, [x, batch, steps, d, t](const Tensor& g) {
    Tensor gx(x.shape());
    for (std::size_t b = 0; b < batch; ++b)
      std::copy_n(g.raw() + b * d, d, gx.raw() + (b * steps + t) * d);
    push_grad(x, gx);
  });
}

Var dropout(const Var& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor mask(x.shape());
  for (double& m : mask.data()) m = uniform01(rng) >= rate ? keep_scale : 0.0;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return emit("dropout", std::move(out), {x}, [x, mask = std::move(mask)](const Tensor& g) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= mask[i];
    push_grad(x, gx);
  });
}

}  // namespace glint::num
