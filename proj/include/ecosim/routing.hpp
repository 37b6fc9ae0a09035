#pragma once

#include <optional>
#include <vector>

#include "ecosim/network.hpp"

namespace ecosim {

struct CostWeights {
  double beta_t = 30.0 / 3600.0;  // CAD per second (30 CAD/h value of time)
  double beta_ghg = 5e-5;         // CAD per g CO2eq (~50 CAD/tCO2eq)
  double beta_nox = 5e-3;         // CAD per g
  double w_t = 1.0;
  double w_ghg = 1.0;
  double w_nox = 1.0;
};

struct LinkCost {
  double tt = 0.0;        // s
  double ghg_cost = 0.0;  // g, ER x TT
  double nox_cost = 0.0;  // g
  double generalized = 0.0;  // CAD
  bool tt_clamped = false;
};

LinkCost link_generalized_cost(const Link& link, double space_mean_speed,
                               double ghg_er, double nox_er, const CostWeights& w,
                               double v_floor = 0.5);

// Per-interval routing cost snapshot over all links. When normalized, each
// objective is divided by its network mean before monetized weighting so the
// weights compare like with like across units.
struct CostSnapshot {
  int interval = -1;
  std::vector<LinkCost> links;       // raw components
  std::vector<double> route_cost;    // cost used by the path search
};

// Divide each column by its mean across links (floored at 1e-12).
void normalize_objectives(std::vector<double>& tt, std::vector<double>& ghg,
                          std::vector<double>& nox);

CostSnapshot build_cost_snapshot(const NetworkGraph& graph,
                                 const std::vector<double>& speed,
                                 const std::vector<double>& ghg_er,
                                 const std::vector<double>& nox_er,
                                 const CostWeights& w, bool normalize,
                                 double v_floor = 0.5);

// Travel-time-only snapshot (UE routing).
CostSnapshot build_tt_snapshot(const NetworkGraph& graph,
                               const std::vector<double>& speed,
                               double v_floor = 0.5);

// Deterministic Dijkstra: minimum cost, ties by fewer links, then by
// lexicographic link-id sequence. Returns link indices, empty when
// origin == destination, nullopt when unreachable.
std::optional<std::vector<int>> shortest_path(const NetworkGraph& graph,
                                              const std::vector<double>& link_costs,
                                              int origin_node_idx,
                                              int destination_node_idx);

enum class Routing { UE, Myopic, Anticipatory };
const char* routing_name(Routing r);

}  // namespace ecosim
