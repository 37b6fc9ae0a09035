#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecosim/network.hpp"

namespace ecosim {

struct ODPair {
  int64_t origin = 0;
  int64_t destination = 0;
  double rate = 0.0;  // relative weight over the loading window
};

std::vector<ODPair> load_od_table(const std::string& od_csv);

enum class Fuel { BEV = 0, EFUEL = 1, HEV = 2, ICEV = 3 };
enum class VehClass { HDV, AV, CAV };

const char* fuel_name(Fuel f);
const char* class_name(VehClass c);

struct FleetMix {
  // shares indexed by Fuel enum order: BEV, EFUEL, HEV, ICEV
  double shares[4] = {0, 0, 0, 0};

  double share(Fuel f) const { return shares[static_cast<int>(f)]; }
  bool valid(double tol = 1e-9) const;

  // Named mixes: I100, I50H50, ES, I25H75, I25B75, I75H25, I75B25, B100,
  // E100, I50B50, I50E50, I25E75, H100, I75E25.
  static FleetMix named(const std::string& name);
  static const std::vector<std::string>& canonical_names();
};

struct VehicleSpec {
  int id = 0;
  VehClass klass = VehClass::HDV;
  Fuel fuel = Fuel::ICEV;
  bool heavy = false;
  double mass_t = 1.5;  // metric tons
  double departure_time = 0.0;
  ODPair od;
};

struct DemandConfig {
  int total = 2500;
  double window_s = 900.0;
  double heavy_share = 0.05;
  double light_mass_t = 1.5;
  double heavy_mass_t = 8.0;
};

// Departure times uniform over the window; OD pick weighted by rate.
// Throws if any OD pair is unreachable on the free-flow graph.
std::vector<VehicleSpec> generate_vehicles(const std::vector<ODPair>& od_table,
                                           const NetworkGraph& graph,
                                           const DemandConfig& cfg, uint64_t seed);

// Exact largest-remainder apportionment of fuel shares and the CAV share.
// Remainder ties go to the later fuel in BEV < EFUEL < HEV < ICEV order.
void assign_fuel_and_class(std::vector<VehicleSpec>& vehicles, const FleetMix& mix,
                           double cav_mpr, uint64_t seed);

// counts per category for n seats and the given shares (same tie rule)
std::vector<int> largest_remainder(const std::vector<double>& shares, int n);

}  // namespace ecosim
