#include "catsim_cli/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace catsim::cli {

namespace {

using Clock = std::chrono::steady_clock;

class StageRunner {
 public:
  explicit StageRunner(RunManifest* manifest, ArtifactWriter* writer)
      : manifest_(manifest), writer_(writer) {}

  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) -> decltype(fn()) {
    const auto start = Clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(name, start);
      } else {
        auto value = fn();
        record(name, start);
        return value;
      }
    } catch (const StageError&) {
      writer_->remove_all_written();
      throw;
    } catch (const std::exception& e) {
      writer_->remove_all_written();
      throw StageError(name, e.what());
    }
  }

 private:
  void record(const std::string& name, Clock::time_point start) {
    manifest_->stages.push_back(
        {name, std::chrono::duration<double, std::milli>(Clock::now() - start).count()});
  }

  RunManifest* manifest_;
  ArtifactWriter* writer_;
};

HeraldOutcome run_herald(const HeraldScenario& scenario) {
  return scenario.detector == DetectorModel::pnr ? herald_pnr(scenario)
                                                 : herald_coincidence(scenario);
}

std::vector<double> tomo_phases(int count) {
  std::vector<double> phases(count);
  for (int k = 0; k < count; ++k) phases[k] = k * std::numbers::pi / count;
  return phases;
}

std::string format_theta(double theta_deg) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "theta_%g", theta_deg);
  return buf;
}

// herald -> detection view; the state every downstream stage consumes
DensityOperator analyzed_state(const ScenarioConfig& config, HeraldOutcome* outcome) {
  *outcome = run_herald(config.scenario);
  return output_loss(*outcome, config.scenario.losses, config.include_detection);
}

void emit_landscape(const ScenarioConfig& config, const DensityOperator& state,
                    ArtifactWriter& writer, nlohmann::json& report, int workers) {
  const auto land =
      best_fit_css(state, config.landscape_parity(), config.landscape->grid, workers);
  if (config.emits("landscape")) {
    writer.write("landscape.csv", land.to_csv());
    writer.write("landscape.json", land.sidecar_json());
  }
  const auto best = land.argmax();
  report["landscape"] = {{"fidelity_star", best.fidelity},
                         {"alpha_sq_star", best.alpha_sq},
                         {"db_star", best.db}};
}

void emit_wigner(const ScenarioConfig& config, const DensityOperator& state,
                 ArtifactWriter& writer, nlohmann::json& report) {
  const auto grid = wigner(state, *config.wigner_axes);
  if (config.emits("wigner")) {
    writer.write("wigner.csv", grid.to_csv());
    writer.write("wigner.json", grid.sidecar_json());
  }
  const auto [mx, mp] = grid.min_location();
  report["wigner"] = {{"min", grid.min_value()}, {"min_x", mx}, {"min_p", mp}};
}

void emit_tomo(const ScenarioConfig& config, const DensityOperator& state, ArtifactWriter& writer,
               nlohmann::json& report) {
  const TomoBlock& block = *config.tomography;
  const auto samples =
      sample_homodyne(state, tomo_phases(block.phases), block.n_samples, block.seed);
  if (config.emits("samples")) writer.write("samples.csv", samples_to_csv(samples));
  const auto mle = mle_reconstruct(samples, block.mle);
  if (config.emits("mle_density")) writer.write("mle_density.json", mle.rho.to_json());
  report["tomography"] = {{"converged", mle.converged},
                          {"iterations", mle.iterations},
                          {"dropped_samples", mle.dropped_samples},
                          {"diagonal", mle.rho.diagonal()}};
}

// the shared single-scenario body used by run/tomo/wigner and each sweep step
void scenario_body(const ScenarioConfig& config, ArtifactWriter& writer, RunManifest& manifest,
                   int workers) {
  StageRunner stages(&manifest, &writer);
  HeraldOutcome outcome;
  const DensityOperator state =
      stages.run("herald", [&] { return analyzed_state(config, &outcome); });
  manifest.report["herald_probability"] = outcome.herald_probability;
  manifest.report["view"] = config.include_detection ? "uncorrected" : "corrected";
  if (config.emits("density"))
    stages.run("density", [&] { writer.write("density.json", state.to_json()); });
  if (config.landscape)
    stages.run("landscape",
               [&] { emit_landscape(config, state, writer, manifest.report, workers); });
  if (config.wigner_axes)
    stages.run("wigner", [&] { emit_wigner(config, state, writer, manifest.report); });
  if (config.tomography)
    stages.run("tomo", [&] { emit_tomo(config, state, writer, manifest.report); });
}

void finalize(RunManifest& manifest, ArtifactWriter& writer) {
  manifest.files = writer.files();
  writer.write("manifest.json", manifest.to_json());
}

RunManifest make_manifest(const ScenarioConfig& config, const std::string& command) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config_hash = fnv1a64_hex(config.canonical_json());
  manifest.seed = config.tomography ? config.tomography->seed : 0;
  return manifest;
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& config, int workers) {
  RunManifest manifest = make_manifest(config, "run");
  ArtifactWriter writer(config.output.dir);
  scenario_body(config, writer, manifest, workers);
  finalize(manifest, writer);
  return manifest;
}

RunManifest sweep_theta(const ScenarioConfig& config, int workers) {
  if (!config.sweep) throw ConfigError("sweep-theta: config has no sweep block");
  if (!config.landscape) throw ConfigError("sweep-theta: config needs a landscape block");
  if (!config.wigner_axes) throw ConfigError("sweep-theta: config needs a wigner block");

  RunManifest manifest = make_manifest(config, "sweep-theta");
  ArtifactWriter writer(config.output.dir);

  std::string csv = "theta_deg,epsilon,fidelity_star,alpha_sq_star,db_star,wigner_min\n";
  for (const double theta : config.sweep->thetas_deg) {
    ScenarioConfig step = config;
    step.sweep.reset();
    step.scenario.mixing = MixingParam::from_theta_deg(theta);
    const std::string sub = format_theta(theta);
    step.output.dir = (writer.dir() / sub).string();
    try {
      step.scenario.validate();
      RunManifest step_manifest = make_manifest(step, "run");
      ArtifactWriter step_writer(step.output.dir);
      scenario_body(step, step_writer, step_manifest, workers);
      finalize(step_manifest, step_writer);
      writer.absorb(step_writer, sub + "/");
      char row[256];
      std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", theta,
                    step.scenario.mixing.epsilon(),
                    step_manifest.report["landscape"]["fidelity_star"].get<double>(),
                    step_manifest.report["landscape"]["alpha_sq_star"].get<double>(),
                    step_manifest.report["landscape"]["db_star"].get<double>(),
                    step_manifest.report["wigner"]["min"].get<double>());
      csv += row;
    } catch (const std::exception& e) {
      manifest.failures.push_back({theta, e.what()});
    }
  }
  writer.write("sweep.csv", csv);
  finalize(manifest, writer);
  return manifest;
}

RunManifest fig1_curves(const ScenarioConfig& config, int workers) {
  (void)workers;
  if (!config.fig1) throw ConfigError("fig1: config has no fig1 block");
  RunManifest manifest = make_manifest(config, "fig1");
  ArtifactWriter writer(config.output.dir);
  StageRunner stages(&manifest, &writer);

  const Fig1Block& block = *config.fig1;
  const GridSpec grid = config.landscape ? config.landscape->grid : GridSpec{};
  const auto curve = stages.run("fig1", [&] {
    return protocol_fidelity_curve(block.n, block.ratio_grid(), block.lambda,
                                   config.scenario.cutoff, grid);
  });
  std::string csv = "ratio,fidelity_star,alpha_sq_star,db_star,w_vacuum,w_nphoton\n";
  double peak = 0.0;
  for (const auto& point : curve) {
    char row[256];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", point.ratio,
                  point.fidelity_star, point.alpha_sq_star, point.db_star, point.weight_low,
                  point.weight_high);
    csv += row;
    peak = std::max(peak, point.fidelity_star);
  }
  writer.write("fig1_curve.csv", csv);
  manifest.report["peak_fidelity"] = peak;
  finalize(manifest, writer);
  return manifest;
}

RunManifest tomo_pipeline(const ScenarioConfig& config, int workers) {
  if (!config.tomography) throw ConfigError("tomo: config has no tomography block");
  ScenarioConfig focused = config;
  focused.landscape.reset();
  focused.wigner_axes.reset();
  return [&] {
    RunManifest manifest = make_manifest(focused, "tomo");
    ArtifactWriter writer(focused.output.dir);
    scenario_body(focused, writer, manifest, workers);
    finalize(manifest, writer);
    return manifest;
  }();
}

RunManifest wigner_pipeline(const ScenarioConfig& config, int workers) {
  if (!config.wigner_axes) throw ConfigError("wigner: config has no wigner block");
  ScenarioConfig focused = config;
  focused.landscape.reset();
  focused.tomography.reset();
  RunManifest manifest = make_manifest(focused, "wigner");
  ArtifactWriter writer(focused.output.dir);
  scenario_body(focused, writer, manifest, workers);
  finalize(manifest, writer);
  return manifest;
}

}  // namespace catsim::cli
