#pragma once

// Batch pipelines behind the CLI subcommands. Every pipeline writes its
// artifacts plus a manifest; any stage error removes partial outputs and
// surfaces as a StageError carrying the stage name.

#include "catsim_cli/config.hpp"
#include "catsim_cli/manifest.hpp"

namespace catsim::cli {

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage \"" + stage + "\" failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

RunManifest run_scenario(const ScenarioConfig& config, int workers = 1);
RunManifest sweep_theta(const ScenarioConfig& config, int workers = 1);
RunManifest fig1_curves(const ScenarioConfig& config, int workers = 1);
RunManifest tomo_pipeline(const ScenarioConfig& config, int workers = 1);
RunManifest wigner_pipeline(const ScenarioConfig& config, int workers = 1);

}  // namespace catsim::cli
