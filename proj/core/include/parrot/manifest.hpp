#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace parrot {

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> output_digests;
  std::optional<std::uint64_t> seed;
  std::string tool_version;
  std::map<std::string, std::size_t> counts;
  std::string started_at;
  std::string finished_at;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

std::string tool_version();

/// UTC ISO-8601. Honors SOURCE_DATE_EPOCH so reruns produce identical manifests.
std::string timestamp_now();

std::filesystem::path manifest_path(const std::filesystem::path& output);

nlohmann::ordered_json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

/// Writes `<output>.manifest.json` atomically.
void write_manifest(const std::filesystem::path& output, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& output);

/// True when every recorded output digest matches the file on disk. Relative names
/// resolve against the directory of `output`.
bool verify_manifest(const std::filesystem::path& output);

}  // namespace parrot
