#include "ecosim/routing.hpp"

#include <algorithm>
#include <climits>
#include <limits>
#include <queue>
#include <stdexcept>

namespace ecosim {

const char* routing_name(Routing r) {
  switch (r) {
    case Routing::UE: return "UE";
    case Routing::Myopic: return "M";
    case Routing::Anticipatory: return "A";
  }
  return "?";
}

LinkCost link_generalized_cost(const Link& link, double space_mean_speed,
                               double ghg_er, double nox_er, const CostWeights& w,
                               double v_floor) {
  LinkCost c;
  auto tt = link_travel_time(link, space_mean_speed, v_floor);
  c.tt = tt.seconds;
  c.tt_clamped = tt.clamped;
  c.ghg_cost = ghg_er * c.tt;
  c.nox_cost = nox_er * c.tt;
  c.generalized = c.tt * w.beta_t * w.w_t + c.ghg_cost * w.beta_ghg * w.w_ghg +
                  c.nox_cost * w.beta_nox * w.w_nox;
  return c;
}

void normalize_objectives(std::vector<double>& tt, std::vector<double>& ghg,
                          std::vector<double>& nox) {
  auto scale = [](std::vector<double>& col) {
    if (col.empty()) return;
    double mean = 0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(col.size());
    double denom = std::max(mean, 1e-12);
    for (double& v : col) v /= denom;
  };
  scale(tt);
  scale(ghg);
  scale(nox);
}

CostSnapshot build_cost_snapshot(const NetworkGraph& graph,
                                 const std::vector<double>& speed,
                                 const std::vector<double>& ghg_er,
                                 const std::vector<double>& nox_er,
                                 const CostWeights& w, bool normalize,
                                 double v_floor) {
  size_t n = graph.link_count();
  CostSnapshot snap;
  snap.links.resize(n);
  snap.route_cost.resize(n);
  std::vector<double> tt(n), ghg(n), nox(n);
  for (size_t i = 0; i < n; ++i) {
    snap.links[i] = link_generalized_cost(graph.link(static_cast<int>(i)), speed[i],
                                          ghg_er[i], nox_er[i], w, v_floor);
    tt[i] = snap.links[i].tt;
    ghg[i] = snap.links[i].ghg_cost;
    nox[i] = snap.links[i].nox_cost;
  }
  if (normalize) normalize_objectives(tt, ghg, nox);
  for (size_t i = 0; i < n; ++i)
    snap.route_cost[i] = tt[i] * w.beta_t * w.w_t + ghg[i] * w.beta_ghg * w.w_ghg +
                         nox[i] * w.beta_nox * w.w_nox;
  return snap;
}

CostSnapshot build_tt_snapshot(const NetworkGraph& graph,
                               const std::vector<double>& speed, double v_floor) {
  size_t n = graph.link_count();
  CostSnapshot snap;
  snap.links.resize(n);
  snap.route_cost.resize(n);
  CostWeights tt_only;
  tt_only.beta_ghg = 0;
  tt_only.beta_nox = 0;
  for (size_t i = 0; i < n; ++i) {
    snap.links[i] = link_generalized_cost(graph.link(static_cast<int>(i)), speed[i],
                                          0.0, 0.0, tt_only, v_floor);
    snap.route_cost[i] = snap.links[i].tt;
  }
  return snap;
}

namespace {

// link-id sequence of the current best path into each node, rebuilt lazily
// only when a (cost, hops) tie needs the lexicographic rule
std::vector<int64_t> id_sequence(const NetworkGraph& g, const std::vector<int>& pred_link,
                                 const std::vector<int>& pred_node, int node) {
  std::vector<int64_t> seq;
  while (pred_link[node] >= 0) {
    seq.push_back(g.link(pred_link[node]).id);
    node = pred_node[node];
  }
  std::reverse(seq.begin(), seq.end());
  return seq;
}

}  // namespace

std::optional<std::vector<int>> shortest_path(const NetworkGraph& graph,
                                              const std::vector<double>& link_costs,
                                              int origin_node_idx,
                                              int destination_node_idx) {
  size_t n = graph.node_count();
  if (link_costs.size() != graph.link_count())
    throw std::invalid_argument("link cost vector size mismatch");
  for (double c : link_costs)
    if (c < 0) throw std::invalid_argument("negative link cost");

  if (origin_node_idx == destination_node_idx) return std::vector<int>{};

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> hops(n, INT_MAX), pred_link(n, -1), pred_node(n, -1);
  std::vector<char> settled(n, 0);

  struct Item {
    double cost;
    int hops;
    int node;
    bool operator>(const Item& o) const {
      if (cost != o.cost) return cost > o.cost;
      if (hops != o.hops) return hops > o.hops;
      return node > o.node;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[origin_node_idx] = 0;
  hops[origin_node_idx] = 0;
  pq.push({0.0, 0, origin_node_idx});

  while (!pq.empty()) {
    Item it = pq.top();
    pq.pop();
    if (settled[it.node]) continue;
    settled[it.node] = 1;
    if (it.node == destination_node_idx) break;
    for (int li : graph.out_links(it.node)) {
      int v = graph.node_index(graph.link(li).to_node);
      if (settled[v]) continue;
      double nd = dist[it.node] + link_costs[li];
      int nh = hops[it.node] + 1;
      bool better = false;
      if (nd < dist[v]) better = true;
      else if (nd == dist[v]) {
        if (nh < hops[v]) better = true;
        else if (nh == hops[v] && pred_link[v] >= 0) {
          auto cand = id_sequence(graph, pred_link, pred_node, it.node);
          cand.push_back(graph.link(li).id);
          auto cur = id_sequence(graph, pred_link, pred_node, v);
          better = cand < cur;
        }
      }
      if (better) {
        dist[v] = nd;
        hops[v] = nh;
        pred_link[v] = li;
        pred_node[v] = it.node;
        pq.push({nd, nh, v});
      }
    }
  }

  if (dist[destination_node_idx] == inf) return std::nullopt;
  std::vector<int> path;
  int node = destination_node_idx;
  while (pred_link[node] >= 0) {
    path.push_back(pred_link[node]);
    node = pred_node[node];
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace ecosim
