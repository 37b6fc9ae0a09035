#include "ecosim/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecosim/csv.hpp"

namespace ecosim {

namespace {

NodeKind parse_kind(const std::string& s) {
  if (s == "ordinary") return NodeKind::Ordinary;
  if (s == "intelligent-intersection") return NodeKind::IntelligentIntersection;
  throw std::runtime_error("unknown node kind '" + s + "'");
}

const char* kind_name(NodeKind k) {
  return k == NodeKind::Ordinary ? "ordinary" : "intelligent-intersection";
}

std::string fmt(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

NetworkGraph NetworkGraph::load(const std::string& nodes_csv,
                                const std::string& links_csv) {
  NetworkGraph g;
  auto nodes = csv::Table::read_file(nodes_csv);
  for (size_t r = 0; r < nodes.row_count(); ++r) {
    Node n;
    n.id = nodes.integer(r, "id");
    n.kind = parse_kind(nodes.cell(r, "kind"));
    if (g.node_index_.count(n.id))
      throw std::runtime_error("duplicate node id " + std::to_string(n.id));
    g.node_index_[n.id] = static_cast<int>(g.nodes_.size());
    g.nodes_.push_back(n);
  }

  auto links = csv::Table::read_file(links_csv);
  for (size_t r = 0; r < links.row_count(); ++r) {
    Link l;
    l.id = links.integer(r, "id");
    l.from_node = links.integer(r, "from");
    l.to_node = links.integer(r, "to");
    l.length_m = links.num(r, "length_m");
    l.lanes = static_cast<int>(links.integer(r, "lanes"));
    l.free_flow_speed = links.num(r, "ffs_mps");
    if (g.link_index_.count(l.id))
      throw std::runtime_error("duplicate link id " + std::to_string(l.id));
    if (!g.node_index_.count(l.from_node) || !g.node_index_.count(l.to_node))
      throw std::runtime_error("dangling node reference, link " + std::to_string(l.id));
    if (l.from_node == l.to_node)
      throw std::runtime_error("self-loop link " + std::to_string(l.id));
    if (!(l.length_m > 0.0))
      throw std::runtime_error("non-positive length, link " + std::to_string(l.id));
    if (l.lanes < 1)
      throw std::runtime_error("lanes < 1, link " + std::to_string(l.id));
    if (!(l.free_flow_speed > 0.0))
      throw std::runtime_error("non-positive free-flow speed, link " + std::to_string(l.id));
    g.link_index_[l.id] = static_cast<int>(g.links_.size());
    g.links_.push_back(l);
  }

  g.build_adjacency();

  for (size_t i = 0; i < g.nodes_.size(); ++i) {
    if (g.out_links_[i].empty() && g.in_links_[i].empty())
      throw std::runtime_error("node " + std::to_string(g.nodes_[i].id) +
                               " referenced by no link");
  }

  g.check_strong_connectivity();
  if (!g.strongly_connected_)
    throw std::runtime_error("network is not strongly connected");
  return g;
}

void NetworkGraph::save(const std::string& nodes_csv,
                        const std::string& links_csv) const {
  csv::Writer nw(nodes_csv);
  nw.row({"id", "kind"});
  for (const auto& n : nodes_) nw.row({std::to_string(n.id), kind_name(n.kind)});
  csv::Writer lw(links_csv);
  lw.row({"id", "from", "to", "length_m", "lanes", "ffs_mps"});
  for (const auto& l : links_)
    lw.row({std::to_string(l.id), std::to_string(l.from_node),
            std::to_string(l.to_node), fmt(l.length_m), std::to_string(l.lanes),
            fmt(l.free_flow_speed)});
}

int NetworkGraph::node_index(int64_t id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end())
    throw std::runtime_error("unknown node id " + std::to_string(id));
  return it->second;
}

int NetworkGraph::link_index(int64_t id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end())
    throw std::runtime_error("unknown link id " + std::to_string(id));
  return it->second;
}

void NetworkGraph::build_adjacency() {
  out_links_.assign(nodes_.size(), {});
  in_links_.assign(nodes_.size(), {});
  for (size_t i = 0; i < links_.size(); ++i) {
    out_links_[node_index(links_[i].from_node)].push_back(static_cast<int>(i));
    in_links_[node_index(links_[i].to_node)].push_back(static_cast<int>(i));
  }
  // deterministic neighbor order by link id
  auto by_id = [this](int a, int b) { return links_[a].id < links_[b].id; };
  for (auto& v : out_links_) std::sort(v.begin(), v.end(), by_id);
  for (auto& v : in_links_) std::sort(v.begin(), v.end(), by_id);
}

void NetworkGraph::check_strong_connectivity() {
  if (nodes_.empty()) { strongly_connected_ = true; return; }
  auto reach = [this](const std::vector<std::vector<int>>& adj, bool forward) {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    size_t count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int li : adj[u]) {
        int v = forward ? node_index(links_[li].to_node) : node_index(links_[li].from_node);
        if (!seen[v]) { seen[v] = 1; ++count; stack.push_back(v); }
      }
    }
    return count;
  };
  strongly_connected_ = reach(out_links_, true) == nodes_.size() &&
                        reach(in_links_, false) == nodes_.size();
}

TravelTime link_travel_time(const Link& link, double space_mean_speed, double v_floor) {
  TravelTime tt;
  double v = space_mean_speed;
  if (v < v_floor) {
    v = v_floor;
    tt.clamped = true;
  }
  tt.seconds = link.length_m / v;
  return tt;
}

LinkState LinkStateStore::current(int link_idx) const {
  if (!history_[link_idx].empty()) return history_[link_idx].back();
  LinkState s;
  s.space_mean_speed = graph_->link(link_idx).free_flow_speed;
  return s;
}

double LinkStateStore::channel_value(const LinkState& s, StateChannel c) const {
  switch (c) {
    case StateChannel::GhgEr: return s.ghg_er;
    case StateChannel::NoxEr: return s.nox_er;
    case StateChannel::Speed: return s.space_mean_speed;
  }
  return 0.0;
}

double LinkStateStore::default_value(int link_idx, StateChannel c) const {
  return c == StateChannel::Speed ? graph_->link(link_idx).free_flow_speed : 0.0;
}

std::vector<double> LinkStateStore::state_series(int link_idx, StateChannel channel,
                                                 int now, int window) const {
  const auto& h = history_[link_idx];
  int avail = std::min<int>(static_cast<int>(h.size()), now + 1);
  std::vector<double> out(window);
  double pad = avail > 0 ? channel_value(h[0], channel) : default_value(link_idx, channel);
  int take = std::min(avail, window);
  for (int i = 0; i < window - take; ++i) out[i] = pad;
  for (int i = 0; i < take; ++i)
    out[window - take + i] = channel_value(h[avail - take + i], channel);
  return out;
}

}  // namespace ecosim
