#include "catsim_cli/config.hpp"

#include <nlohmann/json.hpp>

namespace catsim::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const char* where, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string(where) + ": unknown field \"" + key + "\"");
  }
}

double number(const json& obj, const char* where, const char* key, double fallback,
              bool* present = nullptr) {
  if (!obj.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  if (present) *present = true;
  if (!obj.at(key).is_number())
    throw ConfigError(std::string(where) + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

HeraldScenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario: expected an object");
  try {
    return HeraldScenario::from_json(j.dump());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

LandscapeBlock parse_landscape(const json& j, const HeraldScenario&) {
  reject_unknown(j, "landscape",
                 {"alpha_sq_min", "alpha_sq_max", "alpha_sq_step", "db_min", "db_max", "db_step",
                  "parity", "axis"});
  LandscapeBlock block;
  block.grid.alpha_sq_min = number(j, "landscape", "alpha_sq_min", block.grid.alpha_sq_min);
  block.grid.alpha_sq_max = number(j, "landscape", "alpha_sq_max", block.grid.alpha_sq_max);
  block.grid.alpha_sq_step = number(j, "landscape", "alpha_sq_step", block.grid.alpha_sq_step);
  block.grid.db_min = number(j, "landscape", "db_min", block.grid.db_min);
  block.grid.db_max = number(j, "landscape", "db_max", block.grid.db_max);
  block.grid.db_step = number(j, "landscape", "db_step", block.grid.db_step);
  if (j.contains("axis")) {
    const std::string axis = j.at("axis").get<std::string>();
    if (axis == "x") block.grid.axis = SqueezeAxis::x;
    else if (axis == "p") block.grid.axis = SqueezeAxis::p;
    else throw ConfigError("landscape.axis: expected \"x\" or \"p\"");
  }
  if (j.contains("parity")) {
    const std::string parity = j.at("parity").get<std::string>();
    if (parity == "even") block.parity = Parity::even;
    else if (parity == "odd") block.parity = Parity::odd;
    else if (parity != "auto") throw ConfigError("landscape.parity: expected even, odd or auto");
  }
  try {
    block.grid.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("landscape: ") + e.what());
  }
  return block;
}

WignerAxes parse_wigner(const json& j) {
  reject_unknown(j, "wigner", {"x_min", "x_max", "x_steps", "p_min", "p_max", "p_steps"});
  WignerAxes axes;
  axes.x_min = number(j, "wigner", "x_min", axes.x_min);
  axes.x_max = number(j, "wigner", "x_max", axes.x_max);
  axes.p_min = number(j, "wigner", "p_min", axes.p_min);
  axes.p_max = number(j, "wigner", "p_max", axes.p_max);
  axes.x_steps = static_cast<int>(number(j, "wigner", "x_steps", axes.x_steps));
  axes.p_steps = static_cast<int>(number(j, "wigner", "p_steps", axes.p_steps));
  try {
    axes.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("wigner: ") + e.what());
  }
  return axes;
}

TomoBlock parse_tomo(const json& j) {
  reject_unknown(j, "tomography", {"phases", "n_samples", "seed", "mle"});
  TomoBlock block;
  block.phases = static_cast<int>(number(j, "tomography", "phases", block.phases));
  block.n_samples = static_cast<int>(number(j, "tomography", "n_samples", block.n_samples));
  if (j.contains("seed")) block.seed = j.at("seed").get<std::uint64_t>();
  if (block.phases < 1) throw ConfigError("tomography.phases: must be >= 1");
  if (block.n_samples < 1) throw ConfigError("tomography.n_samples: must be >= 1");
  block.mle.phase_bins = block.phases;
  if (j.contains("mle")) {
    const json& m = j.at("mle");
    reject_unknown(m, "tomography.mle",
                   {"cutoff", "eta", "quad_bin_width", "quad_range", "max_iters", "tol"});
    if (m.contains("cutoff")) block.mle.cutoff = Cutoff{m.at("cutoff").get<int>()};
    block.mle.eta = number(m, "tomography.mle", "eta", block.mle.eta);
    block.mle.quad_bin_width =
        number(m, "tomography.mle", "quad_bin_width", block.mle.quad_bin_width);
    block.mle.quad_range = number(m, "tomography.mle", "quad_range", block.mle.quad_range);
    block.mle.max_iters = static_cast<int>(number(m, "tomography.mle", "max_iters", block.mle.max_iters));
    block.mle.tol = number(m, "tomography.mle", "tol", block.mle.tol);
  }
  try {
    block.mle.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("tomography.mle: ") + e.what());
  }
  return block;
}

SweepBlock parse_sweep(const json& j) {
  reject_unknown(j, "sweep", {"thetas_deg"});
  if (!j.contains("thetas_deg") || !j.at("thetas_deg").is_array() || j.at("thetas_deg").empty())
    throw ConfigError("sweep.thetas_deg: expected a non-empty array");
  SweepBlock block;
  for (const auto& v : j.at("thetas_deg")) block.thetas_deg.push_back(v.get<double>());
  return block;
}

Fig1Block parse_fig1(const json& j) {
  reject_unknown(j, "fig1", {"n", "lambda", "ratio_min", "ratio_max", "ratio_step"});
  Fig1Block block;
  block.n = static_cast<int>(number(j, "fig1", "n", block.n));
  block.lambda = number(j, "fig1", "lambda", block.lambda);
  block.ratio_min = number(j, "fig1", "ratio_min", block.ratio_min);
  block.ratio_max = number(j, "fig1", "ratio_max", block.ratio_max);
  block.ratio_step = number(j, "fig1", "ratio_step", block.ratio_step);
  if (block.n < 2) throw ConfigError("fig1.n: must be >= 2");
  if (!(block.lambda > 0 && block.lambda < 1)) throw ConfigError("fig1.lambda: must lie in (0,1)");
  if (!(block.ratio_step > 0) || block.ratio_max < block.ratio_min)
    throw ConfigError("fig1: bad ratio grid");
  return block;
}

OutputBlock parse_output(const json& j) {
  reject_unknown(j, "output", {"dir", "emit"});
  OutputBlock block;
  if (j.contains("dir")) block.dir = j.at("dir").get<std::string>();
  if (j.contains("emit")) {
    if (!j.at("emit").is_array()) throw ConfigError("output.emit: expected an array");
    for (const auto& v : j.at("emit")) {
      const std::string name = v.get<std::string>();
      if (kEmitNames.count(name) == 0)
        throw ConfigError("output.emit: unknown artifact \"" + name + "\"");
      block.emit.insert(name);
    }
  }
  return block;
}

}  // namespace

std::vector<double> Fig1Block::ratio_grid() const {
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((ratio_max - ratio_min) / ratio_step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) grid.push_back(ratio_min + i * ratio_step);
  return grid;
}

Parity ScenarioConfig::landscape_parity() const {
  if (landscape && landscape->parity) return *landscape->parity;
  return scenario.n_herald % 2 == 0 ? Parity::even : Parity::odd;
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, "config",
                 {"schema", "scenario", "include_detection", "landscape", "wigner", "tomography",
                  "sweep", "fig1", "output"});
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != 1)
    throw ConfigError("config: schema field missing or not the supported version 1");
  if (!j.contains("scenario")) throw ConfigError("config: missing scenario");

  ScenarioConfig config;
  config.scenario = parse_scenario(j.at("scenario"));
  if (j.contains("include_detection")) {
    if (!j.at("include_detection").is_boolean())
      throw ConfigError("config.include_detection: expected a boolean");
    config.include_detection = j.at("include_detection").get<bool>();
  }
  if (j.contains("landscape")) config.landscape = parse_landscape(j.at("landscape"), config.scenario);
  if (j.contains("wigner")) config.wigner_axes = parse_wigner(j.at("wigner"));
  if (j.contains("tomography")) config.tomography = parse_tomo(j.at("tomography"));
  if (j.contains("sweep")) config.sweep = parse_sweep(j.at("sweep"));
  if (j.contains("fig1")) config.fig1 = parse_fig1(j.at("fig1"));
  if (j.contains("output")) config.output = parse_output(j.at("output"));
  return config;
}

std::string ScenarioConfig::canonical_json() const {
  json j;
  j["schema"] = 1;
  j["scenario"] = json::parse(scenario.to_json());
  j["include_detection"] = include_detection;
  if (landscape) {
    json l;
    l["alpha_sq_min"] = landscape->grid.alpha_sq_min;
    l["alpha_sq_max"] = landscape->grid.alpha_sq_max;
    l["alpha_sq_step"] = landscape->grid.alpha_sq_step;
    l["db_min"] = landscape->grid.db_min;
    l["db_max"] = landscape->grid.db_max;
    l["db_step"] = landscape->grid.db_step;
    l["axis"] = landscape->grid.axis == SqueezeAxis::x ? "x" : "p";
    l["parity"] = !landscape->parity ? "auto"
                  : (*landscape->parity == Parity::even ? "even" : "odd");
    j["landscape"] = std::move(l);
  }
  if (wigner_axes) {
    j["wigner"] = {{"x_min", wigner_axes->x_min},   {"x_max", wigner_axes->x_max},
                   {"x_steps", wigner_axes->x_steps}, {"p_min", wigner_axes->p_min},
                   {"p_max", wigner_axes->p_max},   {"p_steps", wigner_axes->p_steps}};
  }
  if (tomography) {
    j["tomography"] = {{"phases", tomography->phases},
                       {"n_samples", tomography->n_samples},
                       {"seed", tomography->seed},
                       {"mle",
                        {{"cutoff", tomography->mle.cutoff.n_max},
                         {"eta", tomography->mle.eta},
                         {"quad_bin_width", tomography->mle.quad_bin_width},
                         {"quad_range", tomography->mle.quad_range},
                         {"max_iters", tomography->mle.max_iters},
                         {"tol", tomography->mle.tol}}}};
  }
  if (sweep) j["sweep"] = {{"thetas_deg", sweep->thetas_deg}};
  if (fig1) {
    j["fig1"] = {{"n", fig1->n},
                 {"lambda", fig1->lambda},
                 {"ratio_min", fig1->ratio_min},
                 {"ratio_max", fig1->ratio_max},
                 {"ratio_step", fig1->ratio_step}};
  }
  j["output"] = {{"dir", output.dir}, {"emit", output.emit}};
  return j.dump();
}

}  // namespace catsim::cli
