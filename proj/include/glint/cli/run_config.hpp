// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glint/model/config.hpp"
#include "glint/training/trainer.hpp"

namespace glint::cli {

/// Bad key, bad value or missing required setting. Maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class KeyType { kString, kInt, kReal, kBool, kList };

struct KeySpec {
  std::string_view key;
  KeyType type;
  std::string_view fallback;
  std::string_view help;
};

/// Every recognised key. Each one is also a `--key` command-line flag.
const std::vector<KeySpec>& key_schema();

/// Preset names: desk, ml-1m, amazon.
const std::map<std::string, std::string>& preset(const std::string& name);

/// Flat key/value settings. Resolution order, later wins: schema defaults,
/// the preset named by `preset`, the config file, command-line flags.
class RunConfig {
 public:
  /// `file_values` and `flag_values` must only use schema keys.
  static RunConfig resolve(const std::map<std::string, std::string>& file_values,
                           const std::map<std::string, std::string>& flag_values);

  const std::string& raw(const std::string& key) const;
  std::string str(const std::string& key) const { return raw(key); }
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> list(const std::string& key) const;

  /// vocab_size is left at 0 for the caller to fill from the data.
  model::ModelConfig model_config() const;
  training::TrainConfig train_config() const;

  /// Typed echo of every key.
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

/// `key = value` lines; `#` starts a comment. Unknown or repeated keys are
/// rejected with the line number.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);
std::map<std::string, std::string> parse_config_text(std::string_view text);

}  // namespace glint::cli
