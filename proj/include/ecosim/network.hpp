#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ecosim {

enum class NodeKind { Ordinary, IntelligentIntersection };

struct Node {
  int64_t id = 0;
  NodeKind kind = NodeKind::Ordinary;
};

struct Link {
  int64_t id = 0;
  int64_t from_node = 0;
  int64_t to_node = 0;
  double length_m = 0.0;
  int lanes = 1;
  double free_flow_speed = 0.0;  // m/s
};

// Per-link aggregate over one dispatch interval (default 60 s).
struct LinkState {
  int interval = -1;
  double space_mean_speed = 0.0;  // m/s
  double density = 0.0;           // veh/km (per-lane by default, see config)
  double flow = 0.0;              // veh/h
  double ghg_er = 0.0;            // CO2eq g/s, recency-weighted mean
  double nox_er = 0.0;            // g/s
  // Plain (unweighted) sums kept for conservation checks and reporting.
  double total_ghg_g = 0.0;
  double total_nox_g = 0.0;
  double vehicle_seconds = 0.0;
  double vehicle_meters = 0.0;
};

enum class StateChannel { GhgEr, NoxEr, Speed };

struct TravelTime {
  double seconds = 0.0;
  bool clamped = false;  // speed was below v_floor
};

class NetworkGraph {
 public:
  static NetworkGraph load(const std::string& nodes_csv, const std::string& links_csv);

  void save(const std::string& nodes_csv, const std::string& links_csv) const;

  size_t node_count() const { return nodes_.size(); }
  size_t link_count() const { return links_.size(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int idx) const { return links_[idx]; }
  const Node& node(int idx) const { return nodes_[idx]; }

  int node_index(int64_t id) const;
  int link_index(int64_t id) const;

  const std::vector<int>& out_links(int node_idx) const { return out_links_[node_idx]; }
  const std::vector<int>& in_links(int node_idx) const { return in_links_[node_idx]; }

  bool strongly_connected() const { return strongly_connected_; }

 private:
  void build_adjacency();
  void check_strong_connectivity();

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::unordered_map<int64_t, int> node_index_;
  std::unordered_map<int64_t, int> link_index_;
  std::vector<std::vector<int>> out_links_;
  std::vector<std::vector<int>> in_links_;
  bool strongly_connected_ = false;
};

// Eq-10 style travel time D_l / v with a floor on speed to keep stopped
// links finite. Default floor 0.5 m/s.
TravelTime link_travel_time(const Link& link, double space_mean_speed,
                            double v_floor = 0.5);

// Append-only per-replication history of LinkState, one writer.
class LinkStateStore {
 public:
  LinkStateStore(const NetworkGraph& graph, double interval_s = 60.0)
      : graph_(&graph), interval_s_(interval_s), history_(graph.link_count()) {}

  double interval_s() const { return interval_s_; }
  const NetworkGraph& graph() const { return *graph_; }

  void append(int link_idx, const LinkState& s) { history_[link_idx].push_back(s); }

  // Latest recorded state, or the empty-link convention (free-flow speed,
  // zero density/flow/ER) when no interval has been recorded yet.
  LinkState current(int link_idx) const;

  int recorded_intervals(int link_idx) const {
    return static_cast<int>(history_[link_idx].size());
  }

  const std::vector<LinkState>& history(int link_idx) const { return history_[link_idx]; }

  // Fixed-length window ending at interval `now` (inclusive), left-padded by
  // repeating the earliest available value; empty history pads with the
  // free-flow default for the channel.
  std::vector<double> state_series(int link_idx, StateChannel channel, int now,
                                   int window = 250) const;

 private:
  double channel_value(const LinkState& s, StateChannel c) const;
  double default_value(int link_idx, StateChannel c) const;

  const NetworkGraph* graph_;
  double interval_s_;
  std::vector<std::vector<LinkState>> history_;
};

}  // namespace ecosim
