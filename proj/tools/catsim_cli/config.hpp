#pragma once

// Strict, versioned JSON run configuration. Unknown keys anywhere are
// rejected before any computation starts; angles arrive in degrees and are
// converted at this boundary only.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <catsim/css.hpp>
#include <catsim/herald.hpp>
#include <catsim/tomo.hpp>

namespace catsim::cli {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LandscapeBlock {
  GridSpec grid;
  std::optional<Parity> parity;  // empty: follow n_herald's parity
};

struct TomoBlock {
  int phases = 12;
  int n_samples = 50000;
  std::uint64_t seed = 12345;
  MleConfig mle;
};

struct SweepBlock {
  std::vector<double> thetas_deg;
};

struct Fig1Block {
  int n = 2;
  double lambda = 0.1;
  double ratio_min = 0.0, ratio_max = 1.5, ratio_step = 0.05;
  std::vector<double> ratio_grid() const;
};

struct OutputBlock {
  std::string dir = "out";
  std::set<std::string> emit;  // subset of kEmitNames; empty = everything applicable
};

inline const std::set<std::string> kEmitNames = {"density", "landscape", "wigner", "samples",
                                                 "mle_density"};

struct ScenarioConfig {
  HeraldScenario scenario;
  bool include_detection = false;  // analyze the uncorrected (eta_det applied) view
  std::optional<LandscapeBlock> landscape;
  std::optional<WignerAxes> wigner_axes;
  std::optional<TomoBlock> tomography;
  std::optional<SweepBlock> sweep;
  std::optional<Fig1Block> fig1;
  OutputBlock output;

  bool emits(const std::string& name) const {
    return output.emit.empty() || output.emit.count(name) > 0;
  }
  Parity landscape_parity() const;

  static ScenarioConfig from_json_text(const std::string& text);
  /// Canonical re-serialization of the effective config (sorted keys),
  /// the input to the manifest's config hash.
  std::string canonical_json() const;
};

}  // namespace catsim::cli
