#include "parrot/manifest.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include <fmt/format.h>

#include "parrot/digest.hpp"
#include "parrot/error.hpp"
#include "parrot/io.hpp"

#ifndef PARROT_VERSION
#define PARROT_VERSION "0.0.0"
#endif

namespace parrot {

std::string tool_version() { return "parrot " PARROT_VERSION; }

std::string timestamp_now() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                     tm.tm_min, tm.tm_sec);
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["config_digest"] = m.config_digest;
  j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
  j["input_digests"] = m.input_digests;
  j["output_digests"] = m.output_digests;
  j["counts"] = m.counts;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["extra"] = m.extra;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.value("tool_version", std::string{});
    m.config_digest = j.value("config_digest", std::string{});
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
    m.input_digests = j.value("input_digests", std::map<std::string, std::string>{});
    m.output_digests = j.value("output_digests", std::map<std::string, std::string>{});
    m.counts = j.value("counts", std::map<std::string, std::size_t>{});
    m.started_at = j.value("started_at", std::string{});
    m.finished_at = j.value("finished_at", std::string{});
    if (j.contains("extra")) m.extra = nlohmann::ordered_json::parse(j["extra"].dump());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& output, const RunManifest& m) {
  io::write_file_atomic(manifest_path(output), to_json(m).dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& output) {
  const auto text = io::read_file(manifest_path(output));
  try {
    return manifest_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("manifest " + manifest_path(output).string() + " is not JSON: " + e.what());
  }
}

bool verify_manifest(const std::filesystem::path& output) {
  const auto m = read_manifest(output);
  for (const auto& [name, digest] : m.output_digests) {
    std::filesystem::path path(name);
    if (path.is_relative()) path = output.parent_path() / path;
    if (!std::filesystem::exists(path) || sha256_file(path) != digest) return false;
  }
  return true;
}

}  // namespace parrot
