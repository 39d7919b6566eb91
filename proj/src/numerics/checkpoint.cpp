// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "glint/numerics/errors.hpp"

namespace glint::num {
namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kPayload = "tensors.bin";
constexpr const char* kFormat = "glint-tensor-archive";

void put_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError("archive: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("archive: cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("archive: write failed for " + path.string());
}

}  // namespace

void save_archive(const std::filesystem::path& dir, const ParamStore& params,
                  const nlohmann::json& metadata) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = 1;
  manifest["payload"] = kPayload;
  manifest["metadata"] = metadata;
  manifest["order"] = nlohmann::json::array();
  manifest["tensors"] = nlohmann::json::object();
  std::string payload;
  payload.reserve(params.num_values() * 8);
  for (const auto& [name, node] : params) {
    const Tensor& t = node->value;
    manifest["order"].push_back(name);
    manifest["tensors"][name] = {{"shape", t.shape()},
                                 {"dtype", "f64"},
                                 {"offset", payload.size()},
                                 {"nbytes", t.size() * 8}};
    for (double v : t.data()) put_le(payload, v);
  }
  write_file(dir / kPayload, payload);
  write_file(dir / kManifest, manifest.dump(2) + "\n");
}

Archive load_archive(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / kManifest));
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError("archive: corrupt manifest in " + dir.string() + ": " + e.what());
  }
  if (!manifest.is_object() || manifest.value("format", "") != kFormat ||
      !manifest.contains("order") || !manifest.contains("tensors")) {
    throw ArchiveError("archive: " + dir.string() + " is not a tensor archive manifest");
  }
  const std::string payload = read_file(dir / kPayload);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  Archive archive;
  archive.metadata = manifest.value("metadata", nlohmann::json::object());
  try {
    for (const auto& name_json : manifest.at("order")) {
      const auto name = name_json.get<std::string>();
      const auto& entry = manifest.at("tensors").at(name);
      if (entry.at("dtype").get<std::string>() != "f64") {
        throw ArchiveError("archive: tensor '" + name + "' has unsupported dtype");
      }
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto nbytes = entry.at("nbytes").get<std::size_t>();
      if (nbytes != shape_size(shape) * 8 || offset + nbytes > payload.size()) {
        throw ArchiveError("archive: tensor '" + name + "' extent is inconsistent with payload");
      }
      Tensor t(shape);
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = get_le(bytes + offset + 8 * i);
      archive.tensors.emplace_back(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError("archive: corrupt manifest entry: " + std::string(e.what()));
  }
  return archive;
}

nlohmann::json load_archive_into(const std::filesystem::path& dir, ParamStore& params) {
  Archive archive = load_archive(dir);
  if (archive.tensors.size() != params.size()) {
    throw ShapeError("checkpoint: archive holds " + std::to_string(archive.tensors.size()) +
                     " tensors, model expects " + std::to_string(params.size()));
  }
  for (const auto& [name, tensor] : archive.tensors) {
    if (!params.contains(name)) {
      throw ShapeError("checkpoint: unexpected tensor '" + name + "'");
    }
    const auto& node = params.get(name);
    if (node->value.shape() != tensor.shape()) {
      throw ShapeError("checkpoint: tensor '" + name + "' has shape " +
                       shape_string(tensor.shape()) + ", model expects " +
                       shape_string(node->value.shape()));
    }
  }
  for (auto& [name, tensor] : archive.tensors) params.get(name)->value = std::move(tensor);
  return archive.metadata;
}

}  // namespace glint::num
