// SPDX-License-Identifier: Apache-2.0
#include "glint/layers/gru.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "glint/numerics/errors.hpp"
#include "glint/numerics/gemm.hpp"

namespace glint::layers {

using num::Activation;
using num::Tensor;
using num::Var;

GruStep gru_cell(const Var& x, const Var& h_prev, const GruParams& p) {
  if (x.shape() != h_prev.shape()) {
    throw ShapeError("gru_cell: input " + num::shape_string(x.shape()) + " vs state " +
                     num::shape_string(h_prev.shape()));
  }
  const bool vector_input = x.value().rank() == 1;
  const Var xs = vector_input ? num::reshape(x, {1, x.dim(0)}) : x;
  const Var hs = vector_input ? num::reshape(h_prev, {1, h_prev.dim(0)}) : h_prev;

  const Var joint = num::concat_cols(hs, xs);
  const Var z = num::activation(num::linear(joint, p.w_update, p.b_update), Activation::kSigmoid);
  const Var r = num::activation(num::linear(joint, p.w_reset, p.b_reset), Activation::kSigmoid);
  const Var reset_joint = num::concat_cols(num::mul(r, hs), xs);
  const Var cand = num::activation(num::linear(reset_joint, p.w_cand, p.b_cand), Activation::kTanh);
  // z·h + (1 - z)·h̃ = h̃ + z·(h - h̃)
  const Var h = num::add(cand, num::mul(z, num::sub(hs, cand)));

  if (!vector_input) return {h, z, cand};
  const num::Shape shape = x.shape();
  return {num::reshape(h, shape), num::reshape(z, shape), num::reshape(cand, shape)};
}

namespace {

double sigmoid(double v) { return num::activate(Activation::kSigmoid, v); }

struct ScanDims {
  std::size_t batch, steps, d;
};

// Row (b, t) of a [B,N,d] buffer.
inline double* row(Tensor& t, const ScanDims& s, std::size_t b, std::size_t step) {
  return t.raw() + (b * s.steps + step) * s.d;
}
inline const double* row(const Tensor& t, const ScanDims& s, std::size_t b, std::size_t step) {
  return t.raw() + (b * s.steps + step) * s.d;
}

void check_gru_weights(const GruParams& p, std::size_t d) {
  auto check = [d](const Var& w, const Var& b, const char* name) {
    if (w.shape() != num::Shape{2 * d, d} || b.shape() != num::Shape{d}) {
      throw ShapeError(std::string("gru: ") + name + " weight " + num::shape_string(w.shape()) +
                       " / bias " + num::shape_string(b.shape()) + " do not match d=" +
                       std::to_string(d));
    }
  };
  check(p.w_update, p.b_update, "update");
  check(p.w_reset, p.b_reset, "reset");
  check(p.w_cand, p.b_cand, "candidate");
}

}  // namespace

GruSequence gru_sequence(const Var& c, const GruParams& p, std::span<const std::size_t> lengths) {
  const Tensor& in = c.value();
  if (in.rank() != 2 && in.rank() != 3) {
    throw ShapeError("gru_sequence: expects [N,d] or [B,N,d], got " +
                     num::shape_string(in.shape()));
  }
  const ScanDims s{in.rank() == 3 ? in.dim(0) : 1, in.dim(in.rank() - 2), in.dim(in.rank() - 1)};
  if (s.steps == 0) throw std::invalid_argument("gru_sequence: empty sequence");
  check_gru_weights(p, s.d);
  std::vector<std::size_t> valid_from(s.batch, 0);
  if (!lengths.empty()) {
    if (lengths.size() != s.batch) throw ShapeError("gru_sequence: one length per sequence");
    for (std::size_t b = 0; b < s.batch; ++b) {
      if (lengths[b] > s.steps) throw ShapeError("gru_sequence: length exceeds steps");
      valid_from[b] = s.steps - lengths[b];
    }
  }

  const std::size_t rows = s.batch * s.steps;
  const std::size_t dd = s.d * s.d;
  // Input halves of each weight (rows [d, 2d)) applied to all steps at once.
  Tensor x_update({rows, s.d}), x_reset({rows, s.d}), x_cand({rows, s.d});
  num::gemm(in.raw(), p.w_update.value().raw() + dd, x_update.raw(), rows, s.d, s.d, false, false, false);
  num::gemm(in.raw(), p.w_reset.value().raw() + dd, x_reset.raw(), rows, s.d, s.d, false, false, false);
  num::gemm(in.raw(), p.w_cand.value().raw() + dd, x_cand.raw(), rows, s.d, s.d, false, false, false);

  Tensor z_all(in.shape()), r_all(in.shape()), cand_all(in.shape()), h_all(in.shape());
  Tensor h_prev({s.batch, s.d});
  Tensor rec_update({s.batch, s.d}), rec_reset({s.batch, s.d}), rec_cand({s.batch, s.d});
  Tensor reset_h({s.batch, s.d});
  const double* wh_update = p.w_update.value().raw();
  const double* wh_reset = p.w_reset.value().raw();
  const double* wh_cand = p.w_cand.value().raw();

  for (std::size_t t = 0; t < s.steps; ++t) {
    num::gemm(h_prev.raw(), wh_update, rec_update.raw(), s.batch, s.d, s.d, false, false, false);
    num::gemm(h_prev.raw(), wh_reset, rec_reset.raw(), s.batch, s.d, s.d, false, false, false);
    for (std::size_t b = 0; b < s.batch; ++b) {
      double* z = row(z_all, s, b, t);
      double* r = row(r_all, s, b, t);
      const double* xu = row(x_update, s, b, t);
      const double* xr = row(x_reset, s, b, t);
      for (std::size_t i = 0; i < s.d; ++i) {
        z[i] = sigmoid(xu[i] + rec_update[b * s.d + i] + p.b_update.value()[i]);
        r[i] = sigmoid(xr[i] + rec_reset[b * s.d + i] + p.b_reset.value()[i]);
        reset_h[b * s.d + i] = r[i] * h_prev[b * s.d + i];
      }
    }
    num::gemm(reset_h.raw(), wh_cand, rec_cand.raw(), s.batch, s.d, s.d, false, false, false);
    for (std::size_t b = 0; b < s.batch; ++b) {
      double* z = row(z_all, s, b, t);
      double* r = row(r_all, s, b, t);
      double* cand = row(cand_all, s, b, t);
      double* h = row(h_all, s, b, t);
      const double* xc = row(x_cand, s, b, t);
      double* hp = h_prev.raw() + b * s.d;
      if (t < valid_from[b]) {
        // Padding: state stays at h0 = 0, trace is zero.
        for (std::size_t i = 0; i < s.d; ++i) z[i] = r[i] = cand[i] = h[i] = hp[i] = 0.0;
        continue;
      }
      for (std::size_t i = 0; i < s.d; ++i) {
        cand[i] = std::tanh(xc[i] + rec_cand[b * s.d + i] + p.b_cand.value()[i]);
        h[i] = z[i] * hp[i] + (1.0 - z[i]) * cand[i];
        hp[i] = h[i];
      }
    }
  }

  GruTrace trace{z_all, cand_all};
  Var hidden = num::make_op(
      "gru_sequence", h_all, {c, p.w_update, p.b_update, p.w_reset, p.b_reset, p.w_cand, p.b_cand},
      [c, p, s, valid_from, z_all, r_all, cand_all, h_all](const Tensor& g) {
        const Tensor& in = c.value();
        const std::size_t rows = s.batch * s.steps;
        const std::size_t dd = s.d * s.d;
        // Pre-activation gradients for every step, consumed after the scan.
        Tensor da_update({rows, s.d}), da_reset({rows, s.d}), da_cand({rows, s.d});
        Tensor dwh_update({s.d, s.d}), dwh_reset({s.d, s.d}), dwh_cand({s.d, s.d});
        Tensor dh_next({s.batch, s.d});
        Tensor hp({s.batch, s.d}), reset_h({s.batch, s.d});
        Tensor dz_pre({s.batch, s.d}), dr_pre({s.batch, s.d}), dc_pre({s.batch, s.d});
        Tensor d_reset_h({s.batch, s.d});
        const double* wh_update = p.w_update.value().raw();
        const double* wh_reset = p.w_reset.value().raw();
        const double* wh_cand = p.w_cand.value().raw();

        for (std::size_t t = s.steps; t-- > 0;) {
          for (std::size_t b = 0; b < s.batch; ++b) {
            const double* prev = t > 0 ? row(h_all, s, b, t - 1) : nullptr;
            const double* r = row(r_all, s, b, t);
            for (std::size_t i = 0; i < s.d; ++i) {
              hp[b * s.d + i] = prev ? prev[i] : 0.0;
              reset_h[b * s.d + i] = r[i] * hp[b * s.d + i];
            }
          }
          // dh, split into the candidate path and the direct path.
          for (std::size_t b = 0; b < s.batch; ++b) {
            const bool pad = t < valid_from[b];
            const double* z = row(z_all, s, b, t);
            const double* cand = row(cand_all, s, b, t);
            const double* gt = row(g, s, b, t);
            for (std::size_t i = 0; i < s.d; ++i) {
              const std::size_t k = b * s.d + i;
              const double dh = pad ? 0.0 : gt[i] + dh_next[k];
              const double dz = dh * (hp[k] - cand[i]);
              dc_pre[k] = dh * (1.0 - z[i]) * (1.0 - cand[i] * cand[i]);
              dz_pre[k] = dz * z[i] * (1.0 - z[i]);
              dh_next[k] = dh * z[i];
            }
          }
          num::gemm(dc_pre.raw(), wh_cand, d_reset_h.raw(), s.batch, s.d, s.d, false, true, false);
          num::gemm(reset_h.raw(), dc_pre.raw(), dwh_cand.raw(), s.d, s.batch, s.d, true, false, true);
          for (std::size_t b = 0; b < s.batch; ++b) {
            const double* r = row(r_all, s, b, t);
            for (std::size_t i = 0; i < s.d; ++i) {
              const std::size_t k = b * s.d + i;
              const double dr = d_reset_h[k] * hp[k];
              dh_next[k] += d_reset_h[k] * r[i];
              dr_pre[k] = dr * r[i] * (1.0 - r[i]);
            }
          }
          num::gemm(dz_pre.raw(), wh_update, dh_next.raw(), s.batch, s.d, s.d, false, true, true);
          num::gemm(dr_pre.raw(), wh_reset, dh_next.raw(), s.batch, s.d, s.d, false, true, true);
          num::gemm(hp.raw(), dz_pre.raw(), dwh_update.raw(), s.d, s.batch, s.d, true, false, true);
          num::gemm(hp.raw(), dr_pre.raw(), dwh_reset.raw(), s.d, s.batch, s.d, true, false, true);
          for (std::size_t b = 0; b < s.batch; ++b) {
            std::copy_n(dz_pre.raw() + b * s.d, s.d, row(da_update, s, b, t));
            std::copy_n(dr_pre.raw() + b * s.d, s.d, row(da_reset, s, b, t));
            std::copy_n(dc_pre.raw() + b * s.d, s.d, row(da_cand, s, b, t));
          }
        }

        auto weight_grad = [&](const Tensor& dwh, const Tensor& da) {
          Tensor gw({2 * s.d, s.d});
          std::copy_n(dwh.raw(), dd, gw.raw());
          num::gemm(in.raw(), da.raw(), gw.raw() + dd, s.d, rows, s.d, true, false, false);
          return gw;
        };
        auto bias_grad = [&](const Tensor& da) {
          Tensor gb({s.d});
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < s.d; ++i) gb[i] += da[r * s.d + i];
          return gb;
        };
        if (c.requires_grad()) {
          Tensor gx(in.shape());
          num::gemm(da_update.raw(), wh_update + dd, gx.raw(), rows, s.d, s.d, false, true, false);
          num::gemm(da_reset.raw(), wh_reset + dd, gx.raw(), rows, s.d, s.d, false, true, true);
          num::gemm(da_cand.raw(), wh_cand + dd, gx.raw(), rows, s.d, s.d, false, true, true);
          num::accumulate_grad(c, gx);
        }
        num::accumulate_grad(p.w_update, weight_grad(dwh_update, da_update));
        num::accumulate_grad(p.w_reset, weight_grad(dwh_reset, da_reset));
        num::accumulate_grad(p.w_cand, weight_grad(dwh_cand, da_cand));
        num::accumulate_grad(p.b_update, bias_grad(da_update));
        num::accumulate_grad(p.b_reset, bias_grad(da_reset));
        num::accumulate_grad(p.b_cand, bias_grad(da_cand));
      });
  return {hidden, std::move(trace)};
}

}  // namespace glint::layers
