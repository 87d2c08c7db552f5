#include "catsim_cli/manifest.hpp"

#include <cstdio>
#include <fstream>

namespace catsim::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["stages"] = nlohmann::json::array();
  for (const auto& s : stages) j["stages"].push_back({{"name", s.name}, {"wall_ms", s.wall_ms}});
  j["files"] = nlohmann::json::array();
  for (const auto& f : files)
    j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv64", f.fnv64}});
  j["failures"] = nlohmann::json::array();
  for (const auto& f : failures)
    j["failures"].push_back({{"theta_deg", f.theta_deg}, {"error", f.error}});
  j["report"] = report;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.version = j.at("version").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("stages"))
    m.stages.push_back({s.at("name").get<std::string>(), s.at("wall_ms").get<double>()});
  for (const auto& f : j.at("files"))
    m.files.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::size_t>(),
                       f.at("fnv64").get<std::string>()});
  for (const auto& f : j.at("failures"))
    m.failures.push_back({f.at("theta_deg").get<double>(), f.at("error").get<std::string>()});
  m.report = j.value("report", nlohmann::json::object());
  return m;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
  files_.push_back({name, content.size(), fnv1a64_hex(content)});
}

void ArtifactWriter::remove_all_written() {
  std::error_code ec;
  for (const auto& f : files_) std::filesystem::remove(dir_ / f.path, ec);
  files_.clear();
}

void ArtifactWriter::absorb(const ArtifactWriter& sub, const std::string& prefix) {
  for (const auto& f : sub.files()) files_.push_back({prefix + f.path, f.bytes, f.fnv64});
}

}  // namespace catsim::cli
