#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ecosim/demand.hpp"
#include "ecosim/emissions.hpp"
#include "ecosim/network.hpp"
#include "ecosim/routing.hpp"
#include "ecosim/simulation.hpp"

namespace ecosim {

struct Scenario {
  double cav_mpr = 0.0;
  Routing routing = Routing::UE;
  bool eco_driving = false;
  std::string mix_name;
  FleetMix mix;
  int replications = 5;
  uint64_t base_seed = 42;

  std::string label() const;
  uint64_t id_hash() const;
};

// {(0,UE), (0.5,M), (0.5,A), (1,M), (1,A)} x {ED, NED} x mixes, in that order.
std::vector<Scenario> enumerate_scenarios(const std::vector<std::string>& mixes,
                                          int replications, uint64_t base_seed);

struct ReplicationResult {
  WtwTotals wtw;
  double mean_tt_s = 0.0;
  double mean_dist_m = 0.0;
  double total_tt_s = 0.0;
  double fleet_km = 0.0;
  double completion_t = 0.0;
  double braking_j = 0.0;
  bool gridlocked = false;
  // conservation-check counterparts
  double vehicle_ghg_g = 0.0;
  double link_ghg_g = 0.0;
  double vehicle_nox_g = 0.0;
  double link_nox_g = 0.0;
  double vehicle_seconds = 0.0;
  double link_vehicle_seconds = 0.0;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<ReplicationResult> replications;
  ReplicationResult mean;   // over ungridlocked replications
  int used_replications = 0;
};

struct ScenarioInputs {
  const NetworkGraph* graph = nullptr;
  const EmissionsConfig* emissions = nullptr;
  const std::vector<ODPair>* od = nullptr;
  DemandConfig demand;
  SimConfig sim;  // eco/routing fields overridden per scenario
  std::shared_ptr<LinkForecaster> forecaster;  // optional, anticipatory only
};

ScenarioResult run_scenario(const Scenario& scenario, const ScenarioInputs& inputs);

// -------------------------------------------------------------------------
// lifecycle cost scorecard

struct FuelCostRates {
  double ghg_perkm = 0.0;  // CAD/km, reference emission cost
  double nox_perkm = 0.0;
  double fuel_perkm = 0.0;
  double om_perkm = 0.0;
  double vehicle_price = 0.0;  // CAD
};

struct CostReference {
  std::array<FuelCostRates, 4> per_fuel;  // by Fuel enum order
  double lifetime_km = 200000.0;
  double travel_time_perkm = 0.0;  // CAD/km, shared across fuels

  static CostReference defaults();
  double capital_perkm(Fuel f) const {
    return per_fuel[static_cast<int>(f)].vehicle_price / lifetime_km;
  }
};

struct CostBreakdown {
  double ghg_emission = 0.0;  // all CAD per km
  double nox_emission = 0.0;
  double travel_time = 0.0;
  double fuel = 0.0;
  double om = 0.0;
  double vehicle_capital = 0.0;

  double emission_total() const { return ghg_emission + nox_emission; }
  double other_total() const { return travel_time + fuel + om + vehicle_capital; }
};

// Emission CAD/km from the simulated result, non-emission columns blended
// from the per-fuel reference by mix shares.
CostBreakdown monetize(const ScenarioResult& result, const CostReference& ref,
                       const CostWeights& betas);

// Pure share-weighted blend of the per-km reference table (the scorecard
// basis, no simulation input).
CostBreakdown reference_costs(const FleetMix& mix, const CostReference& ref);

struct ScoreCard {
  std::vector<std::string> mix;
  std::vector<double> emission_score;  // (0, 50]
  std::vector<double> other_score;
};

// 50 x c_min / c per column; emission and other columns scored separately.
ScoreCard score(const std::vector<std::string>& mixes,
                const std::vector<CostBreakdown>& costs);

// -------------------------------------------------------------------------
// feature importance (standardized least squares)

struct FeatureImportance {
  std::vector<std::string> names;
  std::vector<double> importance;  // sums to 1 unless degenerate
  std::vector<double> cumulative;  // over importance sorted descending
  std::vector<size_t> ranking;     // feature indices, most important first
  std::vector<std::string> dropped;
  bool degenerate = false;
};

FeatureImportance feature_importance(const std::vector<std::vector<double>>& rows,
                                     const std::vector<std::string>& names,
                                     const std::vector<double>& target);

// design-matrix row for a scenario: fuel shares, mpr, routing dummy, ED dummy
std::vector<double> scenario_features(const Scenario& s);
const std::vector<std::string>& scenario_feature_names();

}  // namespace ecosim
