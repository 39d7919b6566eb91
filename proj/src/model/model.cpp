// SPDX-License-Identifier: Apache-2.0
#include "glint/model/model.hpp"

#include <cmath>
#include <stdexcept>

#include "glint/attention/attention.hpp"
#include "glint/layers/dense_selective_gru.hpp"
#include "glint/numerics/errors.hpp"
#include "glint/numerics/init.hpp"

namespace glint::model {

using num::Activation;
using num::Tensor;
using num::Var;

namespace {

std::string prefix(std::size_t layer) { return "layer" + std::to_string(layer) + "."; }

Var masked(const Var& v, const layers::PaddingMask* mask) {
  return mask ? num::mask_rows(v, mask->rows()) : v;
}

}  // namespace

GlintModel::GlintModel(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.hidden, k = config_.kernel;
  auto dense = [&](const std::string& name, std::size_t rows) {
    params_.add(name + ".weight", num::xavier_uniform({rows, d}, rng));
    params_.add(name + ".bias", Tensor({d}));
  };

  Tensor table = num::xavier_uniform({config_.vocab_size, d}, rng);
  for (std::size_t c = 0; c < d; ++c) table[c] = 0.0;
  params_.add("embedding", std::move(table));

  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = prefix(l);
    if (config_.use_attention) {
      for (const char* w : {"query", "key", "value"}) {
        params_.add(p + "attn." + w, num::xavier_uniform({d, d}, rng));
      }
    }
    if (config_.use_gru) {
      dense(p + "gru.conv_in", d);
      if (config_.use_temporal_conv) {
        params_.add(p + "gru.conv_in.kernel", num::xavier_uniform({k, d}, k, k, rng));
        params_.add(p + "gru.conv_out.kernel", num::xavier_uniform({k, d}, k, k, rng));
      }
      for (const char* g : {"update", "reset", "cand"}) dense(p + "gru." + g, 2 * d);
      for (const char* g : {"delta", "omega", "cross"}) dense(p + "gru.gate." + g, d);
    }
    if (config_.use_attention && config_.use_gru) params_.add(p + "mixing", Tensor({2}));
    dense(p + "data_gate", d);
    if (config_.use_gated_mlp) {
      for (const char* g : {"gate", "value", "out"}) dense(p + "mlp." + g, d);
    }
  }
}

Var GlintModel::bind(num::Tape& tape, const std::string& name) const {
  return tape.param(params_.get(name));
}

Var GlintModel::embed(num::Tape& tape, std::span<const std::int32_t> items, std::size_t batch,
                      std::size_t steps, bool training, Rng& rng) const {
  if (items.size() != batch * steps) {
    throw ShapeError("embed: " + std::to_string(items.size()) + " indices for a " +
                     std::to_string(batch) + "x" + std::to_string(steps) + " batch");
  }
  for (std::int32_t i : items) {
    if (i < 0 || static_cast<std::size_t>(i) >= config_.vocab_size) {
      throw std::out_of_range("embed: item index " + std::to_string(i) + " outside vocabulary of " +
                              std::to_string(config_.vocab_size));
    }
  }
  const Var rows = num::gather_rows(bind(tape, "embedding"), items, 0);
  const Var x = num::reshape(rows, {batch, steps, config_.hidden});
  return num::dropout(x, config_.dropout, training, rng);
}

Var GlintModel::expert_mixing_block(num::Tape& tape, const Var& x, std::size_t layer,
                                    const layers::PaddingMask* mask) const {
  const std::string p = prefix(layer);
  Var att, gru;
  if (config_.use_attention) {
    att = attn::linear_attention(
        x, {bind(tape, p + "attn.query"), bind(tape, p + "attn.key"), bind(tape, p + "attn.value"),
            config_.heads});
    att = masked(att, mask);
  }
  if (config_.use_gru) {
    auto dense = [&](const std::string& name) {
      return std::pair{bind(tape, p + name + ".weight"), bind(tape, p + name + ".bias")};
    };
    layers::DenseSelectiveGruParams dsg;
    std::tie(dsg.input_conv.proj_weight, dsg.input_conv.proj_bias) = dense("gru.conv_in");
    if (config_.use_temporal_conv) {
      dsg.input_conv.kernel = bind(tape, p + "gru.conv_in.kernel");
      dsg.output_kernel = bind(tape, p + "gru.conv_out.kernel");
    }
    std::tie(dsg.gru.w_update, dsg.gru.b_update) = dense("gru.update");
    std::tie(dsg.gru.w_reset, dsg.gru.b_reset) = dense("gru.reset");
    std::tie(dsg.gru.w_cand, dsg.gru.b_cand) = dense("gru.cand");
    std::tie(dsg.gate.w_delta, dsg.gate.b_delta) = dense("gru.gate.delta");
    std::tie(dsg.gate.w_omega, dsg.gate.b_omega) = dense("gru.gate.omega");
    std::tie(dsg.gate.w_cross, dsg.gate.b_cross) = dense("gru.gate.cross");
    gru = layers::dense_selective_gru(x, dsg, mask, config_.use_temporal_conv);
  }

  Var mixed;
  if (att && gru) {
    const Var w = num::reshape(
        num::softmax_rows(num::reshape(bind(tape, p + "mixing"), {1, 2})), {2});
    mixed = num::add(num::scale_by(att, w, 0), num::scale_by(gru, w, 1));
  } else {
    mixed = att ? att : gru;
  }
  const Var gate = num::activation(
      num::linear(x, bind(tape, p + "data_gate.weight"), bind(tape, p + "data_gate.bias")),
      Activation::kGelu);
  return masked(num::mul(gate, mixed), mask);
}

Var GlintModel::gated_mlp_block(num::Tape& tape, const Var& z, std::size_t layer,
                                const layers::PaddingMask* mask, bool training, Rng& rng) const {
  if (!config_.use_gated_mlp) return z;
  const std::string p = prefix(layer) + "mlp.";
  auto lin = [&](const Var& in, const char* name) {
    return num::linear(in, bind(tape, p + name + ".weight"), bind(tape, p + name + ".bias"));
  };
  const Var gate = num::activation(lin(z, "gate"), Activation::kGelu);
  const Var value = num::dropout(lin(z, "value"), config_.dropout, training, rng);
  return masked(lin(num::mul(gate, value), "out"), mask);
}

Var GlintModel::layer_forward(num::Tape& tape, const Var& x, std::size_t layer,
                              const layers::PaddingMask* mask, bool training, Rng& rng) const {
  return gated_mlp_block(tape, expert_mixing_block(tape, x, layer, mask), layer, mask, training,
                         rng);
}

Var GlintModel::encode(num::Tape& tape, const data::Batch& batch, bool training, Rng& rng) const {
  if (batch.batch == 0 || batch.steps == 0) throw std::invalid_argument("forward: empty batch");
  if (batch.steps > config_.max_len) {
    throw std::invalid_argument("forward: batch of " + std::to_string(batch.steps) +
                                " steps exceeds max_len " + std::to_string(config_.max_len));
  }
  if (batch.lengths.size() != batch.batch) {
    throw ShapeError("forward: " + std::to_string(batch.lengths.size()) + " lengths for " +
                     std::to_string(batch.batch) + " rows");
  }
  for (std::size_t b = 0; b < batch.batch; ++b) {
    if (batch.lengths[b] == 0 || batch.lengths[b] > batch.steps) {
      throw std::invalid_argument("forward: row " + std::to_string(b) + " has invalid length " +
                                  std::to_string(batch.lengths[b]));
    }
    if (batch.row(b).back() == 0) {
      throw std::invalid_argument("forward: row " + std::to_string(b) + " ends in padding");
    }
  }
  const layers::PaddingMask mask(batch.steps, batch.lengths);
  Var x = embed(tape, batch.items, batch.batch, batch.steps, training, rng);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    x = layer_forward(tape, x, l, &mask, training, rng);
  }
  return x;
}

Var GlintModel::forward(num::Tape& tape, const data::Batch& batch, bool training, Rng& rng) const {
  const Var last = num::take_step(encode(tape, batch, training, rng), batch.steps - 1);
  // The score path must not leak gradient into the frozen padding row.
  std::vector<double> keep(config_.vocab_size, 1.0);
  keep[0] = 0.0;
  const Var table = num::mask_rows(bind(tape, "embedding"), keep);
  return num::matmul(last, table, false, /*trans_b=*/true);
}

std::pair<double, double> GlintModel::mixing_weights(std::size_t layer) const {
  if (!config_.use_attention) return {0.0, 1.0};
  if (!config_.use_gru) return {1.0, 0.0};
  const Tensor& a = params_.get(prefix(layer) + "mixing")->value;
  const double m = std::max(a[0], a[1]);
  const double e0 = std::exp(a[0] - m), e1 = std::exp(a[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

}  // namespace glint::model
