// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "glint/data/split.hpp"
#include "glint/layers/padding.hpp"
#include "glint/model/config.hpp"
#include "glint/numerics/param_store.hpp"
#include "glint/numerics/ops.hpp"

namespace glint::model {

/// GLINT-RU: item embedding, L layers of {expert mixing, gated MLP}, and
/// scores of the last position against the embedding table.
///
/// Parameter names:
///   embedding                                 [V, d], row 0 frozen at zero
///   layer{l}.attn.{query,key,value}           [d, d]      (use_attention)
///   layer{l}.gru.conv_in.{weight,bias}        [d, d], [d] (use_gru)
///   layer{l}.gru.conv_in.kernel, conv_out.kernel  [k, d]  (use_gru, use_temporal_conv)
///   layer{l}.gru.{update,reset,cand}.{weight,bias}  [2d, d], [d]
///   layer{l}.gru.gate.{delta,omega,cross}.{weight,bias}
///   layer{l}.mixing                           [2]         (both experts)
///   layer{l}.data_gate.{weight,bias}
///   layer{l}.mlp.{gate,value,out}.{weight,bias}           (use_gated_mlp)
class GlintModel {
 public:
  /// Xavier-uniform weights, zero biases, zero mixing logits.
  GlintModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  num::ParamStore& params() { return params_; }
  const num::ParamStore& params() const { return params_; }

  /// Scores [B, V] for every item, padding column included.
  num::Var forward(num::Tape& tape, const data::Batch& batch, bool training, Rng& rng) const;

  /// Token representations [B, N, d] after the last layer.
  num::Var encode(num::Tape& tape, const data::Batch& batch, bool training, Rng& rng) const;

  /// Embedding lookup of a [B, N] index matrix, then dropout.
  num::Var embed(num::Tape& tape, std::span<const std::int32_t> items, std::size_t batch,
                 std::size_t steps, bool training, Rng& rng) const;

  /// Z = GeLU(X·W + b) ⊗ (w₁·attention(X) + w₂·dense_selective_gru(X)).
  num::Var expert_mixing_block(num::Tape& tape, const num::Var& x, std::size_t layer,
                               const layers::PaddingMask* mask) const;

  /// R = (GeLU(Z·W_g + b_g) ⊗ dropout(Z·W + b))·W_o + b_o, or R = Z without the block.
  num::Var gated_mlp_block(num::Tape& tape, const num::Var& z, std::size_t layer,
                           const layers::PaddingMask* mask, bool training, Rng& rng) const;

  num::Var layer_forward(num::Tape& tape, const num::Var& x, std::size_t layer,
                         const layers::PaddingMask* mask, bool training, Rng& rng) const;

  /// (attention weight, GRU weight); (1, 0) or (0, 1) with one expert.
  std::pair<double, double> mixing_weights(std::size_t layer) const;

 private:
  num::Var bind(num::Tape& tape, const std::string& name) const;

  ModelConfig config_;
  num::ParamStore params_;
};

}  // namespace glint::model
