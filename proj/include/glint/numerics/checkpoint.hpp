// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glint/numerics/param_store.hpp"

namespace glint::num {

/// Corrupt or inconsistent archive on disk.
class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat named-tensor archive: `<dir>/manifest.json` maps each name to
/// {shape, dtype "f64", offset, nbytes} into `<dir>/tensors.bin`, a packed
/// little-endian payload in registration order. `metadata` is stored
/// verbatim under the manifest's "metadata" key.
void save_archive(const std::filesystem::path& dir, const ParamStore& params,
                  const nlohmann::json& metadata = nlohmann::json::object());

struct Archive {
  std::vector<std::pair<std::string, Tensor>> tensors;
  nlohmann::json metadata;
};

Archive load_archive(const std::filesystem::path& dir);

/// Loads `dir` into an existing store. Every name must be present with the
/// exact shape; mismatches raise ShapeError naming the tensor.
nlohmann::json load_archive_into(const std::filesystem::path& dir, ParamStore& params);

}  // namespace glint::num
