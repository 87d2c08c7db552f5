#pragma once

// Run manifests: checksums and metadata for every emitted artifact,
// written atomically as the last act of a run.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace catsim::cli {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

struct StageTiming {
  std::string name;
  double wall_ms = 0.0;
};

struct EmittedFile {
  std::string path;  // relative to the output directory
  std::size_t bytes = 0;
  std::string fnv64;
};

struct SweepFailure {
  double theta_deg = 0.0;
  std::string error;
};

struct RunManifest {
  std::string command;
  std::string version = kVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<StageTiming> stages;
  std::vector<EmittedFile> files;
  std::vector<SweepFailure> failures;
  nlohmann::json report = nlohmann::json::object();

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// Writes artifacts under one directory (temp file + rename), records
/// checksums, and can undo everything written so far when a stage fails.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  void write(const std::string& name, const std::string& content);
  void remove_all_written();
  const std::vector<EmittedFile>& files() const { return files_; }
  /// Absorb artifacts recorded by a nested writer (sweep sub-runs).
  void absorb(const ArtifactWriter& sub, const std::string& prefix);

 private:
  std::filesystem::path dir_;
  std::vector<EmittedFile> files_;
};

}  // namespace catsim::cli
