// SPDX-License-Identifier: Apache-2.0
#include "glint/model/config.hpp"

#include <stdexcept>

namespace glint::model {

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("model config: " + msg); };
  if (vocab_size < 2) fail("vocab_size must cover padding and at least one item");
  if (hidden == 0) fail("hidden must be positive");
  if (kernel % 2 == 0) fail("kernel must be odd, got " + std::to_string(kernel));
  if (heads == 0 || hidden % heads != 0) {
    fail("heads=" + std::to_string(heads) + " must divide hidden=" + std::to_string(hidden));
  }
  if (layers == 0) fail("layers must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (max_len == 0) fail("max_len must be at least 1");
  if (!use_gru && !use_attention) fail("at least one of use_gru, use_attention must be set");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"hidden", c.hidden},
          {"kernel", c.kernel},
          {"heads", c.heads},
          {"layers", c.layers},
          {"dropout", c.dropout},
          {"max_len", c.max_len},
          {"use_gru", c.use_gru},
          {"use_attention", c.use_attention},
          {"use_temporal_conv", c.use_temporal_conv},
          {"use_gated_mlp", c.use_gated_mlp}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.kernel = j.at("kernel").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.use_gru = j.at("use_gru").get<bool>();
  c.use_attention = j.at("use_attention").get<bool>();
  c.use_temporal_conv = j.at("use_temporal_conv").get<bool>();
  c.use_gated_mlp = j.at("use_gated_mlp").get<bool>();
  c.validate();
  return c;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kDefault: return "default";
    case Variant::kNoGru: return "w/o GRU";
    case Variant::kNoAttention: return "w/o Attention";
    case Variant::kNoTemporalConv: return "w/o Temporal Conv1d";
    case Variant::kNoGatedMlp: return "w/o Gated MLP";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

ModelConfig apply_variant(ModelConfig cfg, Variant v) {
  switch (v) {
    case Variant::kDefault: break;
    case Variant::kNoGru: cfg.use_gru = false; break;
    case Variant::kNoAttention: cfg.use_attention = false; break;
    case Variant::kNoTemporalConv: cfg.use_temporal_conv = false; break;
    case Variant::kNoGatedMlp: cfg.use_gated_mlp = false; break;
  }
  return cfg;
}

}  // namespace glint::model
