#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ecosim/demand.hpp"
#include "ecosim/dynamics.hpp"
#include "ecosim/ecodriving.hpp"
#include "ecosim/emissions.hpp"
#include "ecosim/network.hpp"
#include "ecosim/routing.hpp"

namespace ecosim {

// One-step-ahead per-link forecast source for anticipatory routing.
class LinkForecaster {
 public:
  virtual ~LinkForecaster() = default;
  // Fill per-link forecasts for interval now+1. `now` is the latest recorded
  // interval index (>= 0).
  virtual void forecast(const LinkStateStore& store, int now,
                        std::vector<double>& speed, std::vector<double>& ghg_er,
                        std::vector<double>& nox_er) = 0;
  virtual const char* name() const = 0;
};

// Repeats the latest recorded interval; anticipatory routing with this source
// collapses to myopic by construction.
class PersistenceForecaster : public LinkForecaster {
 public:
  void forecast(const LinkStateStore& store, int now, std::vector<double>& speed,
                std::vector<double>& ghg_er, std::vector<double>& nox_er) override;
  const char* name() const override { return "persistence"; }
};

struct SimConfig {
  int interval_s = 60;
  double v_floor = 0.5;
  IDMParams idm;                    // HDV defaults; v0 follows the link
  double cav_factor = 0.5;          // CAV/AV headway and min-gap scale
  double vehicle_length = 5.0;      // m
  double discharge_per_lane = 0.5;  // veh/s at an intersection approach
  double min_spacing = 0.1;         // m enforced bumper gap
  double coast_zone_m = 100.0;      // eco lookahead window before a node
  bool eco_enabled = false;
  EcoParams eco;
  ResistanceCoeffs resistance;
  Routing cav_routing = Routing::Myopic;
  CostWeights weights;
  bool normalize_costs = false;
  double max_t = 7200.0;
  double stall_timeout_s = 300.0;   // no-progress window that flags gridlock
  bool record_trajectories = false;
};

struct TrajectoryRecord {
  int vehicle_id;
  int t;
  int64_t link_id;
  double speed;
  double accel;
};

struct RunResult {
  bool completed = false;
  bool gridlocked = false;
  double completion_t = 0.0;
  std::vector<int64_t> stuck_links;
};

struct VehicleRuntime {
  // static
  int id = 0;
  VehClass klass = VehClass::HDV;
  Fuel fuel = Fuel::ICEV;
  bool heavy = false;
  double mass_kg = 1500.0;
  double depart = 0.0;
  int origin_idx = 0;
  int dest_idx = 0;
  // dynamic
  std::vector<int> route;  // link indices
  int route_pos = 0;
  int link = -1;           // -1 before entry / after arrival
  double pos = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  bool entered = false;
  bool arrived = false;
  bool ue_recomputed = false;
  double entered_t = -1.0;
  double arrived_t = -1.0;
  double odometer = 0.0;
  double prev_interval_speed = 0.0;  // Zavalko V_{i-1}
  // per-run accumulators
  double ghg_g = 0.0;
  double nox_g = 0.0;
  double energy_kwh = 0.0;
  double braking_j = 0.0;
};

class World {
 public:
  World(const NetworkGraph& graph, const EmissionsConfig& emissions,
        const SimConfig& cfg, const std::vector<VehicleSpec>& specs);

  void set_forecaster(std::shared_ptr<LinkForecaster> f) { forecaster_ = std::move(f); }
  void block_link(int64_t link_id);

  void step();
  RunResult run_until_empty(double max_t = -1.0);

  int now_s() const { return t_; }
  int active_count() const { return active_; }
  int arrived_count() const { return arrived_; }
  int pending_count() const { return pending_; }
  size_t vehicle_count() const { return vehicles_.size(); }

  const VehicleRuntime& vehicle(int id) const { return vehicles_[id]; }
  const LinkStateStore& store() const { return store_; }
  const std::vector<TrajectoryRecord>& trajectories() const { return trajectories_; }

  // totals for reporting
  std::vector<VehicleEmissionTotals> vehicle_emission_totals() const;
  double total_travel_time_s() const;
  double total_distance_m() const;
  double total_braking_j() const;
  double completed_mean_tt_s() const;
  double completed_mean_dist_m() const;

  // diagnostics
  int tt_clamp_events() const { return tt_clamp_events_; }
  int emergency_events() const { return emergency_events_; }
  bool anticipatory_fallback_used() const { return anticipatory_fallback_; }

  // conservation checks (exact accounting counterparts)
  double link_aggregate_ghg_g() const;
  double link_aggregate_nox_g() const;
  double link_aggregate_vehicle_seconds() const;
  double simulated_vehicle_seconds() const { return simulated_vehicle_seconds_; }

  // spacing invariant probe, minimum bumper gap observed so far
  double min_gap_observed() const { return min_gap_observed_; }

 private:
  void close_interval();
  void rebuild_snapshots(int interval_just_closed);
  void reroute_cavs();
  void inject_departures();
  void compute_accels();
  void integrate_and_transfer();
  void try_transfers();
  std::vector<int> plan_route(int from_node_idx, int dest_node_idx,
                              const CostSnapshot& snap) const;
  const CostSnapshot& snapshot_for(const VehicleRuntime& v) const;

  const NetworkGraph& graph_;
  const EmissionsConfig& emissions_;
  SimConfig cfg_;
  std::shared_ptr<LinkForecaster> forecaster_;

  std::vector<VehicleRuntime> vehicles_;
  std::vector<int> departure_order_;  // vehicle ids sorted by (depart, id)
  size_t next_departure_ = 0;
  std::vector<std::deque<int>> entry_queue_;  // per origin node

  std::vector<std::vector<int>> on_link_;  // front (closest to end) first
  std::vector<char> blocked_;
  std::vector<double> discharge_budget_;

  LinkStateStore store_;
  CostSnapshot tt_snapshot_;
  CostSnapshot strat_snapshot_;

  // per-interval accumulators
  std::vector<double> acc_dist_, acc_time_, acc_count_;
  std::vector<std::vector<double>> ghg_sec_, nox_sec_;
  double interval_ghg_sum_ = 0.0, interval_nox_sum_ = 0.0;
  double closed_ghg_sum_ = 0.0, closed_nox_sum_ = 0.0;
  double closed_vehicle_seconds_ = 0.0;

  // scratch reused each step
  std::vector<double> new_pos_, new_speed_, new_accel_, step_dx_;

  int t_ = 0;
  int active_ = 0;
  int arrived_ = 0;
  int pending_ = 0;
  int tt_clamp_events_ = 0;
  int emergency_events_ = 0;
  bool anticipatory_fallback_ = false;
  double simulated_vehicle_seconds_ = 0.0;
  double min_gap_observed_ = 1e18;
  double last_progress_t_ = 0.0;
  std::vector<TrajectoryRecord> trajectories_;
};

}  // namespace ecosim
