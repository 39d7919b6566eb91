// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace glint::data {

/// Raised for unreadable or malformed interaction logs. `line()` is 1-based,
/// 0 when the problem is not tied to a line.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& what, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct DatasetStats {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_interactions = 0;
  double avg_length = 0.0;  // interactions / users
  double sparsity = 0.0;    // 1 - interactions / (users * items)
  std::size_t dropped_users = 0;
};

nlohmann::json to_json(const DatasetStats& stats);

/// Per-user item sequences in chronological order. Item index 0 is padding;
/// retained items map onto 1..num_items.
struct InteractionDataset {
  std::vector<std::string> user_ids;             // user u's external id
  std::vector<std::vector<std::int32_t>> sequences;
  std::vector<std::string> item_ids;             // item_ids[0] is the padding slot
  std::size_t dropped_users = 0;

  std::size_t num_users() const { return sequences.size(); }
  std::size_t num_items() const { return item_ids.empty() ? 0 : item_ids.size() - 1; }
  std::size_t vocab_size() const { return item_ids.size(); }
  DatasetStats stats() const;

  bool operator==(const InteractionDataset&) const = default;
};

enum class LogFormat {
  kAuto,  // by extension: .dat is MovieLens "::", anything else is TSV
  kTsv,   // user \t item \t timestamp [\t ignored...]; optional header row
  kDat,   // user::item::rating::timestamp
};

LogFormat parse_log_format(const std::string& name);

inline constexpr std::size_t kMinSequenceLength = 3;

/// Reads an interaction log. Sequences are sorted by timestamp with ties in
/// input order; users with fewer than three interactions are dropped.
/// External ids are indexed in numeric order when every id is an integer,
/// otherwise in lexicographic order, so row order does not affect the result.
InteractionDataset ingest(const std::filesystem::path& path, LogFormat format = LogFormat::kAuto);

/// Same as `ingest` over (user, item, timestamp) rows already in memory.
struct Interaction {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;
};
InteractionDataset build_dataset(const std::vector<Interaction>& rows);

/// Deterministic successor data: user sequences follow v -> (v mod n) + 1
/// from a uniformly drawn start item.
InteractionDataset synth_cyclic(std::size_t num_items, std::size_t num_users, std::size_t seq_len,
                                std::uint64_t seed);

}  // namespace glint::data
