// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

namespace glint::model {

struct ModelConfig {
  std::size_t vocab_size = 0;  // items + 1; index 0 is padding
  std::size_t hidden = 64;
  std::size_t kernel = 3;
  std::size_t heads = 8;
  std::size_t layers = 2;
  double dropout = 0.5;
  std::size_t max_len = 100;
  bool use_gru = true;
  bool use_attention = true;
  bool use_temporal_conv = true;
  bool use_gated_mlp = true;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// The ablation rows: the full model and one component removed at a time.
enum class Variant { kDefault, kNoGru, kNoAttention, kNoTemporalConv, kNoGatedMlp };

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::kDefault, Variant::kNoGru, Variant::kNoAttention, Variant::kNoTemporalConv,
    Variant::kNoGatedMlp};

std::string_view variant_name(Variant v);  // "default", "w/o GRU", ...
Variant parse_variant(std::string_view name);
ModelConfig apply_variant(ModelConfig cfg, Variant v);

}  // namespace glint::model
