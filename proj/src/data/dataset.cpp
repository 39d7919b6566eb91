// SPDX-License-Identifier: Apache-2.0
#include "glint/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <string_view>

#include "glint/numerics/rng.hpp"

namespace glint::data {

IngestError::IngestError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

nlohmann::json to_json(const DatasetStats& s) {
  return {{"num_users", s.num_users},
          {"num_items", s.num_items},
          {"num_interactions", s.num_interactions},
          {"avg_length", s.avg_length},
          {"sparsity", s.sparsity},
          {"user_slots", s.num_users + 1},
          {"item_slots", s.num_items + 1},
          {"dropped_users", s.dropped_users}};
}

DatasetStats InteractionDataset::stats() const {
  DatasetStats s;
  s.num_users = num_users();
  s.num_items = num_items();
  for (const auto& seq : sequences) s.num_interactions += seq.size();
  s.dropped_users = dropped_users;
  if (s.num_users > 0) {
    s.avg_length = static_cast<double>(s.num_interactions) / static_cast<double>(s.num_users);
  }
  if (s.num_users > 0 && s.num_items > 0) {
    s.sparsity = 1.0 - static_cast<double>(s.num_interactions) /
                           (static_cast<double>(s.num_users) * static_cast<double>(s.num_items));
  }
  return s;
}

LogFormat parse_log_format(const std::string& name) {
  if (name == "auto") return LogFormat::kAuto;
  if (name == "tsv") return LogFormat::kTsv;
  if (name == "dat") return LogFormat::kDat;
  throw std::invalid_argument("unknown log format '" + name + "' (auto, tsv, dat)");
}

namespace {

bool parse_int(std::string_view s, std::int64_t& out) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = line.find(sep, pos);
    if (hit == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, hit - pos));
    pos = hit + sep.size();
  }
}

// Ids sorted numerically when all are integers, else lexicographically.
std::vector<std::string> canonical_order(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::int64_t> numeric(ids.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < ids.size() && all_numeric; ++i) {
    all_numeric = parse_int(ids[i], numeric[i]);
  }
  if (all_numeric) {
    std::vector<std::size_t> idx(ids.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return numeric[a] < numeric[b]; });
    std::vector<std::string> sorted;
    sorted.reserve(ids.size());
    for (auto i : idx) sorted.push_back(std::move(ids[i]));
    return sorted;
  }
  return ids;
}

}  // namespace

InteractionDataset build_dataset(const std::vector<Interaction>& rows) {
  std::map<std::string, std::vector<std::size_t>> by_user;  // row indices in input order
  for (std::size_t i = 0; i < rows.size(); ++i) by_user[rows[i].user].push_back(i);

  InteractionDataset ds;
  std::vector<std::string> kept_users, kept_items;
  for (auto& [user, idx] : by_user) {
    if (idx.size() < kMinSequenceLength) {
      ++ds.dropped_users;
      continue;
    }
    kept_users.push_back(user);
    for (auto i : idx) kept_items.push_back(rows[i].item);
  }
  const std::vector<std::string> users = canonical_order(std::move(kept_users));
  const std::vector<std::string> items = canonical_order(std::move(kept_items));

  std::map<std::string_view, std::int32_t> item_index;
  ds.item_ids.reserve(items.size() + 1);
  ds.item_ids.emplace_back();
  for (const auto& item : items) {
    item_index.emplace(item, static_cast<std::int32_t>(ds.item_ids.size()));
    ds.item_ids.push_back(item);
  }

  ds.user_ids = users;
  ds.sequences.reserve(users.size());
  for (const auto& user : users) {
    std::vector<std::size_t> idx = by_user.at(user);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](auto a, auto b) { return rows[a].timestamp < rows[b].timestamp; });
    std::vector<std::int32_t> seq;
    seq.reserve(idx.size());
    for (auto i : idx) seq.push_back(item_index.at(rows[i].item));
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

InteractionDataset ingest(const std::filesystem::path& path, LogFormat format) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  if (format == LogFormat::kAuto) {
    format = path.extension() == ".dat" ? LogFormat::kDat : LogFormat::kTsv;
  }
  const std::string_view sep = format == LogFormat::kDat ? "::" : "\t";
  const std::size_t min_fields = format == LogFormat::kDat ? 4 : 3;
  const std::size_t time_field = format == LogFormat::kDat ? 3 : 2;

  std::vector<Interaction> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, sep);
    if (fields.size() < min_fields) {
      throw IngestError("expected at least " + std::to_string(min_fields) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    }
    std::int64_t ts = 0;
    if (!parse_int(fields[time_field], ts)) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw IngestError("timestamp '" + std::string(fields[time_field]) + "' is not an integer",
                        line_no);
    }
    if (fields[0].empty() || fields[1].empty()) throw IngestError("empty user or item id", line_no);
    rows.push_back({std::string(fields[0]), std::string(fields[1]), ts});
  }
  if (rows.empty()) throw IngestError(path.string() + " holds no interactions");
  return build_dataset(rows);
}

InteractionDataset synth_cyclic(std::size_t num_items, std::size_t num_users, std::size_t seq_len,
                                std::uint64_t seed) {
  if (num_items < 2) throw std::invalid_argument("synth_cyclic: need at least 2 items");
  Rng rng(seed);
  InteractionDataset ds;
  ds.item_ids.reserve(num_items + 1);
  ds.item_ids.emplace_back();
  for (std::size_t i = 1; i <= num_items; ++i) ds.item_ids.push_back(std::to_string(i));
  for (std::size_t u = 0; u < num_users; ++u) {
    ds.user_ids.push_back(std::to_string(u + 1));
    std::vector<std::int32_t> seq(seq_len);
    std::int32_t v = static_cast<std::int32_t>(uniform_index(rng, num_items)) + 1;
    for (auto& slot : seq) {
      slot = v;
      v = static_cast<std::int32_t>(v % static_cast<std::int32_t>(num_items)) + 1;
    }
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

}  // namespace glint::data
