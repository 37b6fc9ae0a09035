#include "ecosim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ecosim {

void PersistenceForecaster::forecast(const LinkStateStore& store, int /*now*/,
                                     std::vector<double>& speed,
                                     std::vector<double>& ghg_er,
                                     std::vector<double>& nox_er) {
  size_t n = store.graph().link_count();
  speed.resize(n);
  ghg_er.resize(n);
  nox_er.resize(n);
  for (size_t i = 0; i < n; ++i) {
    LinkState s = store.current(static_cast<int>(i));
    speed[i] = s.space_mean_speed;
    ghg_er[i] = s.ghg_er;
    nox_er[i] = s.nox_er;
  }
}

World::World(const NetworkGraph& graph, const EmissionsConfig& emissions,
             const SimConfig& cfg, const std::vector<VehicleSpec>& specs)
    : graph_(graph),
      emissions_(emissions),
      cfg_(cfg),
      store_(graph, cfg.interval_s) {
  size_t nl = graph_.link_count();
  on_link_.resize(nl);
  blocked_.assign(nl, 0);
  discharge_budget_.assign(nl, 0.0);
  acc_dist_.assign(nl, 0.0);
  acc_time_.assign(nl, 0.0);
  acc_count_.assign(nl, 0.0);
  ghg_sec_.assign(nl, std::vector<double>(cfg_.interval_s, 0.0));
  nox_sec_.assign(nl, std::vector<double>(cfg_.interval_s, 0.0));
  entry_queue_.resize(graph_.node_count());

  vehicles_.reserve(specs.size());
  for (const auto& s : specs) {
    VehicleRuntime v;
    v.id = s.id;
    v.klass = s.klass;
    v.fuel = s.fuel;
    v.heavy = s.heavy;
    v.mass_kg = s.mass_t * 1000.0;
    v.depart = s.departure_time;
    v.origin_idx = graph_.node_index(s.od.origin);
    v.dest_idx = graph_.node_index(s.od.destination);
    vehicles_.push_back(v);
  }
  // ids must be dense 0..n-1 in spec order
  for (size_t i = 0; i < vehicles_.size(); ++i)
    if (vehicles_[i].id != static_cast<int>(i))
      throw std::runtime_error("vehicle ids must be dense and ordered");

  departure_order_.resize(vehicles_.size());
  for (size_t i = 0; i < vehicles_.size(); ++i) departure_order_[i] = static_cast<int>(i);
  std::stable_sort(departure_order_.begin(), departure_order_.end(), [this](int a, int b) {
    if (vehicles_[a].depart != vehicles_[b].depart)
      return vehicles_[a].depart < vehicles_[b].depart;
    return a < b;
  });
  pending_ = static_cast<int>(vehicles_.size());

  rebuild_snapshots(-1);
}

void World::block_link(int64_t link_id) { blocked_[graph_.link_index(link_id)] = 1; }

const CostSnapshot& World::snapshot_for(const VehicleRuntime& v) const {
  if (v.klass == VehClass::CAV && cfg_.cav_routing != Routing::UE)
    return strat_snapshot_;
  return tt_snapshot_;
}

std::vector<int> World::plan_route(int from_node_idx, int dest_node_idx,
                                   const CostSnapshot& snap) const {
  auto p = shortest_path(graph_, snap.route_cost, from_node_idx, dest_node_idx);
  if (!p)
    throw std::runtime_error("no route from node " +
                             std::to_string(graph_.node(from_node_idx).id) + " to " +
                             std::to_string(graph_.node(dest_node_idx).id));
  return *p;
}

void World::rebuild_snapshots(int interval_just_closed) {
  size_t n = graph_.link_count();
  std::vector<double> speed(n), ghg(n), nox(n);
  for (size_t i = 0; i < n; ++i) {
    LinkState s = store_.current(static_cast<int>(i));
    // a blocked link advertises zero speed so route costs reflect the incident
    speed[i] = blocked_[i] ? 0.0 : s.space_mean_speed;
    ghg[i] = s.ghg_er;
    nox[i] = s.nox_er;
  }
  tt_snapshot_ = build_tt_snapshot(graph_, speed, cfg_.v_floor);
  for (const auto& lc : tt_snapshot_.links)
    if (lc.tt_clamped) ++tt_clamp_events_;
  tt_snapshot_.interval = interval_just_closed;

  if (cfg_.cav_routing == Routing::Anticipatory && interval_just_closed >= 0) {
    if (forecaster_) {
      std::vector<double> fs, fg, fn;
      forecaster_->forecast(store_, interval_just_closed, fs, fg, fn);
      for (size_t i = 0; i < n; ++i) {
        double cap = graph_.link(static_cast<int>(i)).free_flow_speed * 1.05;
        fs[i] = std::clamp(fs[i], 0.0, cap);
        fg[i] = std::max(0.0, fg[i]);
        fn[i] = std::max(0.0, fn[i]);
      }
      strat_snapshot_ = build_cost_snapshot(graph_, fs, fg, fn, cfg_.weights,
                                            cfg_.normalize_costs, cfg_.v_floor);
    } else {
      anticipatory_fallback_ = true;  // persistence: current states stand in
      strat_snapshot_ = build_cost_snapshot(graph_, speed, ghg, nox, cfg_.weights,
                                            cfg_.normalize_costs, cfg_.v_floor);
    }
  } else {
    strat_snapshot_ = build_cost_snapshot(graph_, speed, ghg, nox, cfg_.weights,
                                          cfg_.normalize_costs, cfg_.v_floor);
  }
  strat_snapshot_.interval = interval_just_closed;
}

void World::close_interval() {
  int interval = t_ / cfg_.interval_s - 1;
  for (size_t li = 0; li < graph_.link_count(); ++li) {
    const Link& link = graph_.link(static_cast<int>(li));
    LinkState s;
    s.interval = interval;
    s.vehicle_seconds = acc_time_[li];
    s.vehicle_meters = acc_dist_[li];
    s.space_mean_speed =
        acc_time_[li] > 0 ? acc_dist_[li] / acc_time_[li] : link.free_flow_speed;
    double mean_count = acc_count_[li] / cfg_.interval_s;
    s.density = mean_count / (link.length_m / 1000.0 * link.lanes);
    s.flow = s.density * s.space_mean_speed * 3.6;
    s.ghg_er = recency_weighted_mean(ghg_sec_[li]);
    s.nox_er = recency_weighted_mean(nox_sec_[li]);
    for (double g : ghg_sec_[li]) s.total_ghg_g += g;
    for (double g : nox_sec_[li]) s.total_nox_g += g;
    store_.append(static_cast<int>(li), s);

    closed_vehicle_seconds_ += acc_time_[li];
    acc_dist_[li] = acc_time_[li] = acc_count_[li] = 0.0;
    std::fill(ghg_sec_[li].begin(), ghg_sec_[li].end(), 0.0);
    std::fill(nox_sec_[li].begin(), nox_sec_[li].end(), 0.0);
  }
  closed_ghg_sum_ += interval_ghg_sum_;
  closed_nox_sum_ += interval_nox_sum_;
  interval_ghg_sum_ = interval_nox_sum_ = 0.0;

  rebuild_snapshots(interval);
  reroute_cavs();
}

void World::reroute_cavs() {
  if (cfg_.cav_routing == Routing::UE) return;
  std::map<std::pair<int, int>, std::vector<int>> memo;
  for (auto& v : vehicles_) {
    if (!v.entered || v.arrived || v.klass != VehClass::CAV) continue;
    const Link& cur = graph_.link(v.route[v.route_pos]);
    int next_node = graph_.node_index(cur.to_node);
    if (next_node == v.dest_idx) {
      v.route.resize(v.route_pos + 1);
      continue;
    }
    auto key = std::make_pair(next_node, v.dest_idx);
    auto it = memo.find(key);
    if (it == memo.end()) {
      auto p = shortest_path(graph_, strat_snapshot_.route_cost, next_node, v.dest_idx);
      it = memo.emplace(key, p ? *p : std::vector<int>{}).first;
    }
    if (it->second.empty()) continue;  // unreachable under current costs, keep route
    std::vector<int> nr(v.route.begin(), v.route.begin() + v.route_pos + 1);
    nr.insert(nr.end(), it->second.begin(), it->second.end());
    v.route = std::move(nr);
  }
}

void World::inject_departures() {
  while (next_departure_ < departure_order_.size() &&
         vehicles_[departure_order_[next_departure_]].depart <= t_) {
    int id = departure_order_[next_departure_++];
    entry_queue_[vehicles_[id].origin_idx].push_back(id);
  }
  for (size_t node = 0; node < entry_queue_.size(); ++node) {
    auto& q = entry_queue_[node];
    // FIFO per first link: a vehicle blocked on one out-link does not hold
    // back vehicles departing onto a different, clear out-link
    std::set<int> closed_first;
    for (size_t qi = 0; qi < q.size();) {
      VehicleRuntime& v = vehicles_[q[qi]];
      if (v.route.empty())
        v.route = plan_route(v.origin_idx, v.dest_idx, snapshot_for(v));
      int first = v.route[0];
      if (closed_first.count(first)) { ++qi; continue; }
      const auto& occ = on_link_[first];
      if (blocked_[first] ||
          (!occ.empty() &&
           vehicles_[occ.back()].pos < cfg_.vehicle_length + cfg_.min_spacing)) {
        closed_first.insert(first);
        ++qi;
        continue;
      }
      // enter at a gap-appropriate speed so the origin link is not an
      // artificial bottleneck: free-flow when clear, throttled when backed up
      double entry_speed = graph_.link(first).free_flow_speed;
      if (!occ.empty()) {
        const VehicleRuntime& back = vehicles_[occ.back()];
        double gap = back.pos - cfg_.vehicle_length;
        entry_speed = std::min(entry_speed,
                               std::max(back.speed, gap / cfg_.idm.T));
      }
      v.entered = true;
      v.entered_t = t_;
      v.link = first;
      v.pos = 0.0;
      v.speed = entry_speed;
      v.route_pos = 0;
      on_link_[first].push_back(v.id);
      ++active_;
      --pending_;
      last_progress_t_ = t_;
      q.erase(q.begin() + qi);
    }
  }
}

void World::compute_accels() {
  if (new_accel_.size() != vehicles_.size()) new_accel_.resize(vehicles_.size());
  for (size_t li = 0; li < graph_.link_count(); ++li) {
    const Link& link = graph_.link(static_cast<int>(li));
    const auto& occ = on_link_[li];
    for (size_t i = 0; i < occ.size(); ++i) {
      VehicleRuntime& v = vehicles_[occ[i]];
      IDMParams p = cfg_.idm;
      p.v0 = link.free_flow_speed;
      if (v.klass != VehClass::HDV) {
        p.T *= cfg_.cav_factor;
        p.s0 *= cfg_.cav_factor;
      }
      std::optional<LeaderInfo> leader;
      if (i > 0) {
        const VehicleRuntime& lead = vehicles_[occ[i - 1]];
        leader = LeaderInfo{lead.pos - v.pos - cfg_.vehicle_length, lead.speed};
      } else if (v.route_pos + 1 < static_cast<int>(v.route.size())) {
        int nl = v.route[v.route_pos + 1];
        if (blocked_[nl]) {
          leader = LeaderInfo{link.length_m - v.pos + p.s0, 0.0};
        } else if (!on_link_[nl].empty()) {
          const VehicleRuntime& lead = vehicles_[on_link_[nl].back()];
          leader = LeaderInfo{link.length_m - v.pos + lead.pos - cfg_.vehicle_length,
                              lead.speed};
        }
      }
      double a = idm_acceleration(v.speed, leader, p);
      if (cfg_.eco_enabled) {
        double downstream = 1e9;
        if (v.route_pos + 1 < static_cast<int>(v.route.size()) &&
            link.length_m - v.pos < cfg_.coast_zone_m)
          downstream = store_.current(v.route[v.route_pos + 1]).space_mean_speed;
        EcoCommand ec = eco_filter(a, v.speed, downstream, cfg_.eco, cfg_.resistance);
        if (ec.emergency) ++emergency_events_;
        a = ec.accel;
      }
      new_accel_[v.id] = a;
    }
  }
}

void World::integrate_and_transfer() {
  const double dt = 1.0;
  int sec_slot = t_ % cfg_.interval_s;
  for (size_t li = 0; li < graph_.link_count(); ++li) {
    const Link& link = graph_.link(static_cast<int>(li));
    const auto& occ = on_link_[li];
    if (occ.empty()) continue;
    acc_count_[li] += static_cast<double>(occ.size());

    double prev_new_pos = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < occ.size(); ++i) {
      VehicleRuntime& v = vehicles_[occ[i]];
      double cap = std::numeric_limits<double>::infinity();
      if (i > 0) {
        cap = prev_new_pos - cfg_.vehicle_length - cfg_.min_spacing;
      } else if (v.route_pos + 1 < static_cast<int>(v.route.size())) {
        int nl = v.route[v.route_pos + 1];
        if (blocked_[nl]) {
          cap = link.length_m;
        } else if (!on_link_[nl].empty()) {
          cap = link.length_m +
                std::max(0.0, vehicles_[on_link_[nl].back()].pos -
                                  cfg_.vehicle_length - cfg_.min_spacing);
        }
      }

      double a = new_accel_[v.id];
      double v_end = v.speed + a * dt;
      double dx;
      if (v_end < 0.0) {
        double ts = a < 0.0 ? v.speed / (-a) : 0.0;
        dx = 0.5 * v.speed * ts;
        v_end = 0.0;
      } else {
        dx = v.speed * dt + 0.5 * a * dt * dt;
      }
      dx = std::max(0.0, dx);
      double np = v.pos + dx;
      if (np > cap) {
        np = std::max(cap, v.pos);
        double capped_dx = np - v.pos;
        v_end = std::max(0.0, capped_dx / dt);
        ++emergency_events_;
        dx = capped_dx;
      }
      double actual_a = (v_end - v.speed) / dt;

      if (i > 0) {
        double gap = prev_new_pos - np - cfg_.vehicle_length;
        if (gap < min_gap_observed_) min_gap_observed_ = gap;
      }
      prev_new_pos = np;

      // accounting on the link where the second started
      acc_dist_[li] += dx;
      acc_time_[li] += dt;
      simulated_vehicle_seconds_ += dt;
      if (dx > 0.1) last_progress_t_ = t_;

      Rates r = emissions_.tailpipe_rates(v.fuel, v.heavy, v_end, actual_a);
      v.ghg_g += r.ghg * dt;
      v.nox_g += r.nox * dt;
      v.energy_kwh += r.energy * dt;
      ghg_sec_[li][sec_slot] += r.ghg * dt;
      nox_sec_[li][sec_slot] += r.nox * dt;
      interval_ghg_sum_ += r.ghg * dt;
      interval_nox_sum_ += r.nox * dt;

      DrivingInterval iv = kinematics_from_distance(dx, dt, v.prev_interval_speed);
      v.braking_j += braking_energy(iv, v.mass_kg, cfg_.resistance);
      v.prev_interval_speed = iv.speed;

      v.pos = np;
      v.speed = v_end;
      v.accel = actual_a;
      v.odometer += dx;

      if (cfg_.record_trajectories)
        trajectories_.push_back({v.id, t_, link.id, v_end, actual_a});
    }
  }
  try_transfers();
}

void World::try_transfers() {
  for (size_t li = 0; li < graph_.link_count(); ++li) {
    const Link& link = graph_.link(static_cast<int>(li));
    auto& occ = on_link_[li];
    while (!occ.empty()) {
      VehicleRuntime& v = vehicles_[occ.front()];
      if (v.pos < link.length_m) break;

      // one-time UE refresh at the first intersection for non-CAV vehicles
      if ((v.klass == VehClass::HDV || v.klass == VehClass::AV) && v.route_pos == 0 &&
          !v.ue_recomputed) {
        v.ue_recomputed = true;
        int here = graph_.node_index(link.to_node);
        if (here != v.dest_idx) {
          auto p = shortest_path(graph_, tt_snapshot_.route_cost, here, v.dest_idx);
          if (p) {
            std::vector<int> nr{v.route[0]};
            nr.insert(nr.end(), p->begin(), p->end());
            v.route = std::move(nr);
          }
        } else {
          v.route.resize(1);
        }
      }

      if (v.route_pos + 1 >= static_cast<int>(v.route.size())) {
        v.arrived = true;
        v.arrived_t = t_ + 1.0;
        v.link = -1;
        occ.erase(occ.begin());
        --active_;
        ++arrived_;
        last_progress_t_ = t_;
        continue;
      }

      int nl = v.route[v.route_pos + 1];
      if (blocked_[nl] || discharge_budget_[li] < 1.0) {
        v.pos = link.length_m;
        v.speed = 0.0;
        break;
      }
      double residual = v.pos - link.length_m;
      double entry_cap = graph_.link(nl).length_m;
      if (!on_link_[nl].empty()) {
        entry_cap =
            vehicles_[on_link_[nl].back()].pos - cfg_.vehicle_length - cfg_.min_spacing;
        if (entry_cap < 0.0) {
          v.pos = link.length_m;
          v.speed = 0.0;
          break;
        }
      }
      discharge_budget_[li] -= 1.0;
      occ.erase(occ.begin());
      v.link = nl;
      v.pos = std::max(0.0, std::min(residual, entry_cap));
      ++v.route_pos;
      on_link_[nl].push_back(v.id);
      last_progress_t_ = t_;
    }
  }
}

void World::step() {
  if (t_ > 0 && t_ % cfg_.interval_s == 0) close_interval();
  for (size_t li = 0; li < graph_.link_count(); ++li) {
    double rate = cfg_.discharge_per_lane * graph_.link(static_cast<int>(li)).lanes;
    discharge_budget_[li] = std::min(discharge_budget_[li] + rate, std::max(1.0, rate));
  }
  inject_departures();
  compute_accels();
  integrate_and_transfer();
  ++t_;
}

RunResult World::run_until_empty(double max_t) {
  if (max_t < 0) max_t = cfg_.max_t;
  RunResult r;
  while (active_ + pending_ > 0 && t_ < max_t) {
    step();
    if (active_ + pending_ > 0 && t_ - last_progress_t_ > cfg_.stall_timeout_s) break;
  }
  r.completed = active_ + pending_ == 0;
  r.gridlocked = !r.completed;
  r.completion_t = t_;
  if (r.gridlocked) {
    for (size_t li = 0; li < graph_.link_count(); ++li)
      if (!on_link_[li].empty())
        r.stuck_links.push_back(graph_.link(static_cast<int>(li)).id);
  }
  return r;
}

std::vector<VehicleEmissionTotals> World::vehicle_emission_totals() const {
  std::vector<VehicleEmissionTotals> out;
  out.reserve(vehicles_.size());
  for (const auto& v : vehicles_)
    out.push_back({v.fuel, v.ghg_g, v.nox_g, v.energy_kwh});
  return out;
}

// Travel time runs from the scheduled departure, so origin-queue delay counts.
double World::total_travel_time_s() const {
  double s = 0;
  for (const auto& v : vehicles_)
    if (v.arrived) s += v.arrived_t - v.depart;
  return s;
}

double World::total_distance_m() const {
  double s = 0;
  for (const auto& v : vehicles_) s += v.odometer;
  return s;
}

double World::total_braking_j() const {
  double s = 0;
  for (const auto& v : vehicles_) s += v.braking_j;
  return s;
}

double World::completed_mean_tt_s() const {
  double s = 0;
  int n = 0;
  for (const auto& v : vehicles_)
    if (v.arrived) { s += v.arrived_t - v.depart; ++n; }
  return n ? s / n : 0.0;
}

double World::completed_mean_dist_m() const {
  double s = 0;
  int n = 0;
  for (const auto& v : vehicles_)
    if (v.arrived) { s += v.odometer; ++n; }
  return n ? s / n : 0.0;
}

double World::link_aggregate_ghg_g() const {
  double s = interval_ghg_sum_;
  for (size_t li = 0; li < graph_.link_count(); ++li)
    for (const auto& st : store_.history(static_cast<int>(li))) s += st.total_ghg_g;
  return s;
}

double World::link_aggregate_nox_g() const {
  double s = interval_nox_sum_;
  for (size_t li = 0; li < graph_.link_count(); ++li)
    for (const auto& st : store_.history(static_cast<int>(li))) s += st.total_nox_g;
  return s;
}

double World::link_aggregate_vehicle_seconds() const {
  double s = closed_vehicle_seconds_;
  for (size_t li = 0; li < graph_.link_count(); ++li) s += acc_time_[li];
  return s;
}

}  // namespace ecosim
