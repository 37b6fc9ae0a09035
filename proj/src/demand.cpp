#include "ecosim/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecosim/csv.hpp"
#include "ecosim/rng.hpp"

namespace ecosim {

std::vector<ODPair> load_od_table(const std::string& od_csv) {
  auto t = csv::Table::read_file(od_csv);
  std::vector<ODPair> out;
  for (size_t r = 0; r < t.row_count(); ++r) {
    ODPair p;
    p.origin = t.integer(r, "origin");
    p.destination = t.integer(r, "destination");
    p.rate = t.num(r, "rate");
    if (p.origin == p.destination)
      throw std::runtime_error("od pair with origin == destination at row " +
                               std::to_string(r + 1));
    if (p.rate < 0)
      throw std::runtime_error("negative od rate at row " + std::to_string(r + 1));
    out.push_back(p);
  }
  if (out.empty()) throw std::runtime_error("od table is empty: " + od_csv);
  return out;
}

const char* fuel_name(Fuel f) {
  switch (f) {
    case Fuel::BEV: return "BEV";
    case Fuel::EFUEL: return "EFUEL";
    case Fuel::HEV: return "HEV";
    case Fuel::ICEV: return "ICEV";
  }
  return "?";
}

const char* class_name(VehClass c) {
  switch (c) {
    case VehClass::HDV: return "HDV";
    case VehClass::AV: return "AV";
    case VehClass::CAV: return "CAV";
  }
  return "?";
}

bool FleetMix::valid(double tol) const {
  double sum = 0;
  for (double s : shares) {
    if (s < 0 || s > 1) return false;
    sum += s;
  }
  return std::abs(sum - 1.0) <= tol;
}

namespace {

FleetMix make_mix(double icev, double hev, double bev, double efuel) {
  FleetMix m;
  m.shares[static_cast<int>(Fuel::ICEV)] = icev;
  m.shares[static_cast<int>(Fuel::HEV)] = hev;
  m.shares[static_cast<int>(Fuel::BEV)] = bev;
  m.shares[static_cast<int>(Fuel::EFUEL)] = efuel;
  return m;
}

}  // namespace

FleetMix FleetMix::named(const std::string& name) {
  if (name == "I100") return make_mix(1.00, 0.00, 0.00, 0.00);
  if (name == "I50H50") return make_mix(0.50, 0.50, 0.00, 0.00);
  if (name == "ES") return make_mix(0.25, 0.25, 0.25, 0.25);
  if (name == "I25H75") return make_mix(0.25, 0.75, 0.00, 0.00);
  if (name == "I25B75") return make_mix(0.25, 0.00, 0.75, 0.00);
  if (name == "I75H25") return make_mix(0.75, 0.25, 0.00, 0.00);
  if (name == "I75B25") return make_mix(0.75, 0.00, 0.25, 0.00);
  if (name == "B100") return make_mix(0.00, 0.00, 1.00, 0.00);
  if (name == "E100") return make_mix(0.00, 0.00, 0.00, 1.00);
  if (name == "I50B50") return make_mix(0.50, 0.00, 0.50, 0.00);
  if (name == "I50E50") return make_mix(0.50, 0.00, 0.00, 0.50);
  if (name == "I25E75") return make_mix(0.25, 0.00, 0.00, 0.75);
  if (name == "H100") return make_mix(0.00, 1.00, 0.00, 0.00);
  if (name == "I75E25") return make_mix(0.75, 0.00, 0.00, 0.25);
  throw std::runtime_error("unknown fleet mix name '" + name + "'");
}

const std::vector<std::string>& FleetMix::canonical_names() {
  static const std::vector<std::string> names = {
      "I100", "I50H50", "ES",     "I25H75", "I25B75", "I75H25", "I75B25",
      "B100", "E100",   "I50B50", "I50E50", "I25E75", "H100",   "I75E25"};
  return names;
}

std::vector<int> largest_remainder(const std::vector<double>& shares, int n) {
  size_t k = shares.size();
  std::vector<int> counts(k);
  std::vector<double> rem(k);
  int assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    double exact = shares[i] * n;
    counts[i] = static_cast<int>(std::floor(exact + 1e-12));
    rem[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<size_t> order(k);
  for (size_t i = 0; i < k; ++i) order[i] = i;
  // larger remainder first; remainder ties favor the later category
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (std::abs(rem[a] - rem[b]) > 1e-12) return rem[a] > rem[b];
    return a > b;
  });
  for (int s = 0; s < n - assigned; ++s) counts[order[s % k]]++;
  return counts;
}

namespace {

// free-flow reachability from every origin used in the table
void check_reachability(const std::vector<ODPair>& od, const NetworkGraph& g) {
  for (const auto& p : od) {
    int src = g.node_index(p.origin);
    int dst = g.node_index(p.destination);
    std::vector<char> seen(g.node_count(), 0);
    std::vector<int> stack{src};
    seen[src] = 1;
    bool found = src == dst;
    while (!stack.empty() && !found) {
      int u = stack.back();
      stack.pop_back();
      for (int li : g.out_links(u)) {
        int v = g.node_index(g.link(li).to_node);
        if (!seen[v]) {
          if (v == dst) { found = true; break; }
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    if (!found)
      throw std::runtime_error("unreachable od pair " + std::to_string(p.origin) +
                               " -> " + std::to_string(p.destination));
  }
}

}  // namespace

std::vector<VehicleSpec> generate_vehicles(const std::vector<ODPair>& od_table,
                                           const NetworkGraph& graph,
                                           const DemandConfig& cfg, uint64_t seed) {
  if (cfg.total < 0) throw std::runtime_error("negative demand total");
  check_reachability(od_table, graph);

  std::vector<double> cum(od_table.size());
  double running = 0;
  for (size_t i = 0; i < od_table.size(); ++i) {
    running += od_table[i].rate;
    cum[i] = running;
  }
  if (!(running > 0)) throw std::runtime_error("od table has zero total rate");

  Rng rng(seed);
  std::vector<VehicleSpec> out;
  out.reserve(cfg.total);
  for (int i = 0; i < cfg.total; ++i) {
    VehicleSpec v;
    v.id = i;
    v.od = od_table[rng.pick_cumulative(cum)];
    v.departure_time = rng.uniform(0.0, cfg.window_s);
    out.push_back(v);
  }

  // heavy-vehicle flags over a seeded permutation, exact share
  int heavy_count = largest_remainder({1.0 - cfg.heavy_share, cfg.heavy_share},
                                      cfg.total)[1];
  Rng hrng(seed ^ 0x6865617679ULL);  // independent stream
  auto perm = hrng.permutation(cfg.total);
  for (int i = 0; i < heavy_count; ++i) out[perm[i]].heavy = true;
  for (auto& v : out) v.mass_t = v.heavy ? cfg.heavy_mass_t : cfg.light_mass_t;
  return out;
}

void assign_fuel_and_class(std::vector<VehicleSpec>& vehicles, const FleetMix& mix,
                           double cav_mpr, uint64_t seed) {
  if (!mix.valid()) throw std::runtime_error("fleet mix shares do not sum to 1");
  if (cav_mpr < 0 || cav_mpr > 1) throw std::runtime_error("cav_mpr out of [0,1]");
  int n = static_cast<int>(vehicles.size());
  if (n == 0) return;

  std::vector<double> shares(mix.shares, mix.shares + 4);
  auto fuel_counts = largest_remainder(shares, n);
  Rng frng(seed ^ 0x6675656cULL);
  auto fperm = frng.permutation(n);
  int at = 0;
  for (int f = 0; f < 4; ++f)
    for (int c = 0; c < fuel_counts[f]; ++c)
      vehicles[fperm[at++]].fuel = static_cast<Fuel>(f);

  auto cav_counts = largest_remainder({1.0 - cav_mpr, cav_mpr}, n);
  Rng crng(seed ^ 0x636176ULL);
  auto cperm = crng.permutation(n);
  for (int i = 0; i < n; ++i)
    vehicles[cperm[i]].klass = i < cav_counts[1] ? VehClass::CAV : VehClass::HDV;
}

}  // namespace ecosim
