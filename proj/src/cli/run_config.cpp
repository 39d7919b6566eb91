// SPDX-License-Identifier: Apache-2.0
#include "glint/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace glint::cli {

const std::vector<KeySpec>& key_schema() {
  static const std::vector<KeySpec> schema = {
      {"preset", KeyType::kString, "desk", "desk, ml-1m or amazon"},
      // data
      {"data", KeyType::kString, "synth", "interaction log path, or 'synth'"},
      {"format", KeyType::kString, "auto", "auto, tsv or dat"},
      {"synth_items", KeyType::kInt, "50", "synthetic catalog size"},
      {"synth_users", KeyType::kInt, "500", "synthetic user count"},
      {"synth_length", KeyType::kInt, "30", "synthetic sequence length"},
      {"synth_seed", KeyType::kInt, "1", "synthetic data seed"},
      // model
      {"hidden", KeyType::kInt, "32", "hidden size d"},
      {"kernel", KeyType::kInt, "3", "temporal convolution size k (odd)"},
      {"heads", KeyType::kInt, "2", "attention heads, must divide d"},
      {"layers", KeyType::kInt, "1", "stacked layers L"},
      {"dropout", KeyType::kReal, "0.2", "dropout rate"},
      {"max_len", KeyType::kInt, "20", "input window N_max"},
      {"use_gru", KeyType::kBool, "true", "dense selective GRU expert"},
      {"use_attention", KeyType::kBool, "true", "linear attention expert"},
      {"use_temporal_conv", KeyType::kBool, "true", "temporal convolutions in the GRU expert"},
      {"use_gated_mlp", KeyType::kBool, "true", "gated MLP block (false: Light variant)"},
      // training and evaluation
      {"lr", KeyType::kReal, "0.001", "Adam learning rate"},
      {"weight_decay", KeyType::kReal, "0", "L2 weight decay"},
      {"batch_size", KeyType::kInt, "128", "training batch size"},
      {"eval_batch_size", KeyType::kInt, "512", "evaluation batch size"},
      {"epochs", KeyType::kInt, "50", "maximum epochs"},
      {"patience", KeyType::kInt, "10", "early-stopping patience on validation NDCG@k"},
      {"seed", KeyType::kInt, "42", "seed for init, shuffling and dropout"},
      {"k", KeyType::kInt, "10", "metric cutoff K"},
      {"exclude_seen", KeyType::kBool, "true", "drop input-window items from the ranking"},
      // paths
      {"checkpoint", KeyType::kString, "", "checkpoint directory"},
      {"log", KeyType::kString, "", "per-epoch JSON-lines log"},
      {"ranks", KeyType::kString, "", "per-user rank dump (TSV)"},
      {"output", KeyType::kString, "", "CSV, TSV or manifest output path"},
      // bench and sweep
      {"component", KeyType::kString, "glint_layer", "glint_layer, linear_attn or quadratic_attn"},
      {"lengths", KeyType::kList, "128,256,512,1024", "sequence lengths to time"},
      {"reps", KeyType::kInt, "5", "timed repetitions (at least 5)"},
      {"bench_batch", KeyType::kInt, "8", "batch size for timing"},
      {"axis", KeyType::kString, "k", "sweep axis: k, d or L"},
      {"values", KeyType::kList, "1,3,5,7,9", "sweep grid"},
  };
  return schema;
}

const std::map<std::string, std::string>& preset(const std::string& name) {
  static const std::map<std::string, std::map<std::string, std::string>> presets = {
      {"desk", {}},
      {"ml-1m",
       {{"hidden", "128"}, {"heads", "8"}, {"layers", "2"}, {"dropout", "0.2"},
        {"max_len", "200"}, {"batch_size", "2048"}, {"eval_batch_size", "2048"}}},
      {"amazon",
       {{"hidden", "64"}, {"heads", "8"}, {"layers", "2"}, {"dropout", "0.5"},
        {"max_len", "100"}, {"batch_size", "2048"}, {"eval_batch_size", "2048"}}},
  };
  const auto it = presets.find(name);
  if (it == presets.end()) throw ConfigError("unknown preset '" + name + "' (desk, ml-1m, amazon)");
  return it->second;
}

namespace {

const KeySpec* find_key(std::string_view key) {
  for (const auto& spec : key_schema()) {
    if (spec.key == key) return &spec;
  }
  return nullptr;
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
  return false;
}

template <typename T>
bool parse_number(std::string_view v, T& out) {
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  return ec == std::errc() && ptr == v.data() + v.size() && !v.empty();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void check_value(const KeySpec& spec, const std::string& v) {
  auto bad = [&](const char* what) {
    throw ConfigError("'" + std::string(spec.key) + "' expects " + what + ", got '" + v + "'");
  };
  switch (spec.type) {
    case KeyType::kString: break;
    case KeyType::kInt: {
      long long x;
      if (!parse_number(v, x)) bad("an integer");
      break;
    }
    case KeyType::kReal: {
      double x;
      if (!parse_number(v, x)) bad("a number");
      break;
    }
    case KeyType::kBool: {
      bool x;
      if (!parse_bool(v, x)) bad("true or false");
      break;
    }
    case KeyType::kList: {
      std::stringstream ss(v);
      std::string item;
      std::size_t n = 0;
      while (std::getline(ss, item, ',')) {
        unsigned long long x;
        if (!parse_number(trim(item), x)) bad("a comma-separated list of non-negative integers");
        ++n;
      }
      if (n == 0) bad("a non-empty list");
      break;
    }
  }
}

}  // namespace

RunConfig RunConfig::resolve(const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& flag_values) {
  RunConfig cfg;
  for (const auto& spec : key_schema()) cfg.values_[std::string(spec.key)] = spec.fallback;
  for (const auto* layer : {&file_values, &flag_values}) {
    for (const auto& [k, v] : *layer) {
      if (!find_key(k)) throw ConfigError("unknown key '" + k + "'");
    }
  }
  std::string preset_name = cfg.values_["preset"];
  if (auto it = file_values.find("preset"); it != file_values.end()) preset_name = it->second;
  if (auto it = flag_values.find("preset"); it != flag_values.end()) preset_name = it->second;
  for (const auto& [k, v] : preset(preset_name)) cfg.values_[k] = v;
  for (const auto* layer : {&file_values, &flag_values}) {
    for (const auto& [k, v] : *layer) cfg.values_[k] = v;
  }
  for (const auto& spec : key_schema()) check_value(spec, cfg.values_[std::string(spec.key)]);
  return cfg;
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

long long RunConfig::integer(const std::string& key) const {
  long long x = 0;
  parse_number(raw(key), x);
  return x;
}

std::size_t RunConfig::count(const std::string& key) const {
  const long long x = integer(key);
  if (x < 0) throw ConfigError("'" + key + "' must be non-negative");
  return static_cast<std::size_t>(x);
}

double RunConfig::real(const std::string& key) const {
  double x = 0;
  parse_number(raw(key), x);
  return x;
}

bool RunConfig::flag(const std::string& key) const {
  bool x = false;
  parse_bool(raw(key), x);
  return x;
}

std::vector<std::size_t> RunConfig::list(const std::string& key) const {
  std::vector<std::size_t> out;
  std::stringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    unsigned long long x = 0;
    parse_number(trim(item), x);
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig m;
  m.hidden = count("hidden");
  m.kernel = count("kernel");
  m.heads = count("heads");
  m.layers = count("layers");
  m.dropout = real("dropout");
  m.max_len = count("max_len");
  m.use_gru = flag("use_gru");
  m.use_attention = flag("use_attention");
  m.use_temporal_conv = flag("use_temporal_conv");
  m.use_gated_mlp = flag("use_gated_mlp");
  return m;
}

training::TrainConfig RunConfig::train_config() const {
  training::TrainConfig t;
  t.lr = real("lr");
  t.weight_decay = real("weight_decay");
  t.batch_size = count("batch_size");
  t.eval_batch_size = count("eval_batch_size");
  t.max_epochs = count("epochs");
  t.patience = count("patience");
  t.seed = static_cast<std::uint64_t>(integer("seed"));
  t.k = count("k");
  t.exclude_seen = flag("exclude_seen");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& spec : key_schema()) {
    const std::string key(spec.key);
    switch (spec.type) {
      case KeyType::kString: j[key] = raw(key); break;
      case KeyType::kInt: j[key] = integer(key); break;
      case KeyType::kReal: j[key] = real(key); break;
      case KeyType::kBool: j[key] = flag(key); break;
      case KeyType::kList: j[key] = list(key); break;
    }
  }
  return j;
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!find_key(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (!out.emplace(key, value).second) throw ConfigError(where + "repeated key '" + key + "'");
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace glint::cli
