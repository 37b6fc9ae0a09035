#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecosim/demand.hpp"
#include "ecosim/predictor.hpp"
#include "ecosim/scenario.hpp"
#include "ecosim/simulation.hpp"

namespace ecosim {

// Top-level project configuration (JSON). Relative paths resolve against the
// directory containing the config file.
struct ProjectConfig {
  std::string nodes_csv;
  std::string links_csv;
  std::string od_csv;
  std::string emissions_json;

  std::vector<std::string> mixes;  // defaults to the full named set
  int replications = 5;
  uint64_t base_seed = 42;

  DemandConfig demand;
  SimConfig sim;
  CostReference costs = CostReference::defaults();
  PredictorConfig predictor;

  std::string output_dir = "out";
  // optional trained checkpoints, empty -> persistence fallback
  std::string predictor_ghg, predictor_nox, predictor_speed;

  uint64_t config_hash = 0;  // FNV-1a over the raw config file bytes

  static ProjectConfig load(const std::string& path);
};

uint64_t fnv1a_bytes(const std::string& bytes);

// --filter key=value matching; keys: mix, mpr, routing, eco.
// Unknown key or malformed value throws.
bool scenario_matches(const Scenario& s,
                      const std::map<std::string, std::string>& filters);

std::map<std::string, std::string> parse_filters(const std::vector<std::string>& kv);

}  // namespace ecosim
