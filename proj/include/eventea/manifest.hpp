#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace eventea {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written next to every output file as
/// "<output>.manifest.json".
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> config;  // resolved options
  std::string dataset;
  std::string fold;
  std::map<std::string, std::uint64_t> seeds;
  std::string tool_version = kToolVersion;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

std::string utc_timestamp();

std::filesystem::path manifest_path(const std::filesystem::path& output);

/// Stamps finished_at and writes the manifest for `output`.
void write_manifest(const std::filesystem::path& output, RunManifest manifest);

}  // namespace eventea
