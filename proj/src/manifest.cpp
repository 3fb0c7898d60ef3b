#include "eventea/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "eventea/kg.hpp"

namespace eventea {

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["dataset"] = dataset;
  j["fold"] = fold;
  j["seeds"] = seeds;
  j["tool_version"] = tool_version;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.subcommand = j.at("subcommand").get<std::string>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.dataset = j.at("dataset").get<std::string>();
  m.fold = j.at("fold").get<std::string>();
  m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.started_at = j.at("started_at").get<std::string>();
  m.finished_at = j.at("finished_at").get<std::string>();
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

void write_manifest(const std::filesystem::path& output, RunManifest manifest) {
  manifest.finished_at = utc_timestamp();
  std::ofstream out(manifest_path(output));
  if (!out) throw DataError("cannot write " + manifest_path(output).string());
  out << manifest.to_json();
}

}  // namespace eventea
