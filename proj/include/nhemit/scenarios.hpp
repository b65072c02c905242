#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nhemit/boundstates.hpp"

namespace nhemit {

struct ScenarioReport {
  std::string id;
  bool passed = true;
  nlohmann::json checks = nlohmann::json::object();
  std::vector<std::string> artifacts;  // paths relative to the output directory
  double seconds = 0.0;
};

std::vector<std::string> scenario_ids();

// Full parameter set of a registered figure. Running the returned document
// reproduces the figure; it is also written as config.json by run_scenario.
nlohmann::json default_config(const std::string& id);

// Writes CSV/JSON data, config.json, report.json and a plot script into
// `out_dir` (created if needed).
ScenarioReport run_scenario(const nlohmann::json& config, const std::string& out_dir);

// Normalizes each state, writes <stem>_<n>.csv photon profiles into `dir` and
// returns [{E, class, c_e, profile_csv_path, residual, photon_weight}].
nlohmann::json export_bound_states(const SelfEnergy& sigma, std::vector<BoundState>& states, const std::string& dir,
                                   const std::string& stem, int radius, std::vector<std::string>* artifacts = nullptr);

// Matplotlib script for a list of panels
//   {"csv", "x", "y": [...], "logx", "logy", "title", "style": "line"|"scatter"}.
std::string plot_script(const std::string& title, const nlohmann::json& panels);

}  // namespace nhemit
