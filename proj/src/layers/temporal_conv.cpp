// SPDX-License-Identifier: Apache-2.0
#include "glint/layers/temporal_conv.hpp"

#include <stdexcept>
#include <string>

#include "glint/numerics/errors.hpp"

namespace glint::layers {

using num::Tensor;
using num::Var;

PaddingMask::PaddingMask(std::size_t steps, std::vector<std::size_t> lengths)
    : steps_(steps), lengths_(std::move(lengths)), rows_(lengths_.size() * steps_, 0.0) {
  for (std::size_t b = 0; b < lengths_.size(); ++b) {
    if (lengths_[b] > steps_) {
      throw ShapeError("padding mask: length " + std::to_string(lengths_[b]) +
                       " exceeds " + std::to_string(steps_) + " steps");
    }
    for (std::size_t t = steps_ - lengths_[b]; t < steps_; ++t) rows_[b * steps_ + t] = 1.0;
  }
}

Var depthwise_conv1d(const Var& x, const Var& kernel) {
  const Tensor& in = x.value();
  const Tensor& w = kernel.value();
  if (in.rank() != 2 && in.rank() != 3) {
    throw ShapeError("temporal_conv1d: expects [N,d] or [B,N,d], got " +
                     num::shape_string(in.shape()));
  }
  const std::size_t batch = in.rank() == 3 ? in.dim(0) : 1;
  const std::size_t steps = in.dim(in.rank() - 2);
  const std::size_t d = in.dim(in.rank() - 1);
  if (steps == 0) throw std::invalid_argument("temporal_conv1d: empty sequence");
  if (w.rank() != 2 || w.dim(1) != d) {
    throw ShapeError("temporal_conv1d: kernel " + num::shape_string(w.shape()) +
                     " does not match " + std::to_string(d) + " channels");
  }
  const std::size_t k = w.dim(0);
  if (k % 2 == 0) {
    throw std::invalid_argument("temporal_conv1d: kernel size must be odd, got " +
                                std::to_string(k));
  }
  const auto half = static_cast<std::ptrdiff_t>(k / 2);
  const auto n = static_cast<std::ptrdiff_t>(steps);

  Tensor out(in.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = in.raw() + b * steps * d;
    double* dst = out.raw() + b * steps * d;
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t s = t + static_cast<std::ptrdiff_t>(j) - half;
        if (s < 0 || s >= n) continue;
        const double* xs = src + s * static_cast<std::ptrdiff_t>(d);
        const double* wj = w.raw() + j * d;
        double* yt = dst + t * static_cast<std::ptrdiff_t>(d);
        for (std::size_t c = 0; c < d; ++c) yt[c] += wj[c] * xs[c];
      }
    }
  }
  return num::make_op(
      "temporal_conv1d", std::move(out), {x, kernel},
      [x, kernel, batch, steps, d, k, half, n](const Tensor& g) {
        const Tensor& in = x.value();
        const Tensor& w = kernel.value();
        Tensor gx(in.shape());
        Tensor gw(w.shape());
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = in.raw() + b * steps * d;
          const double* gb = g.raw() + b * steps * d;
          double* gxb = gx.raw() + b * steps * d;
          for (std::ptrdiff_t t = 0; t < n; ++t) {
            const double* gt = gb + t * static_cast<std::ptrdiff_t>(d);
            for (std::size_t j = 0; j < k; ++j) {
              const std::ptrdiff_t s = t + static_cast<std::ptrdiff_t>(j) - half;
              if (s < 0 || s >= n) continue;
              const double* xs = src + s * static_cast<std::ptrdiff_t>(d);
              const double* wj = w.raw() + j * d;
              double* gxs = gxb + s * static_cast<std::ptrdiff_t>(d);
              double* gwj = gw.raw() + j * d;
              for (std::size_t c = 0; c < d; ++c) {
                gxs[c] += wj[c] * gt[c];
                gwj[c] += xs[c] * gt[c];
              }
            }
          }
        }
        num::accumulate_grad(x, gx);
        num::accumulate_grad(kernel, gw);
      });
}

Var temporal_conv1d(const Var& x, const TemporalConvParams& params, bool apply_projection,
                    const PaddingMask* mask) {
  Var h = x;
  if (apply_projection) {
    h = num::linear(h, params.proj_weight, params.proj_bias);
    if (mask) h = num::mask_rows(h, mask->rows());
  }
  h = depthwise_conv1d(h, params.kernel);
  if (mask) h = num::mask_rows(h, mask->rows());
  return h;
}

}  // namespace glint::layers
