#include <stdexcept>
#include <cmath>
#include <map>

#include "doctest.h"
#include "ecosim/demand.hpp"
#include "test_util.hpp"

using namespace ecosim;
using testutil::TempDir;

namespace {

NetworkGraph ring_graph(const TempDir& tmp) {
  return NetworkGraph::load(tmp.write("nodes.csv", testutil::ring_nodes()),
                            tmp.write("links.csv", testutil::ring_links()));
}

std::vector<VehicleSpec> dummy_fleet(int n) {
  std::vector<VehicleSpec> v(n);
  for (int i = 0; i < n; ++i) v[i].id = i;
  return v;
}

}  // namespace

TEST_CASE("od table parsing and validation") {
  TempDir tmp("dem_od");
  auto od = load_od_table(
      tmp.write("od.csv", "origin,destination,rate\n0,2,3\n2,0,1\n"));
  REQUIRE(od.size() == 2);
  CHECK(od[0].origin == 0);
  CHECK(od[0].destination == 2);
  CHECK(od[0].rate == doctest::Approx(3.0));
  CHECK_THROWS_AS(load_od_table(tmp.write("bad1.csv",
                                          "origin,destination,rate\n1,1,2\n")),
                  std::runtime_error);
  CHECK_THROWS_AS(load_od_table(tmp.write("bad2.csv",
                                          "origin,destination,rate\n0,1,-2\n")),
                  std::runtime_error);
  CHECK_THROWS_AS(load_od_table(tmp.write("bad3.csv", "origin,destination,rate\n")),
                  std::runtime_error);
}

TEST_CASE("vehicle generation") {
  TempDir tmp("dem_gen");
  auto g = ring_graph(tmp);
  std::vector<ODPair> od = {{0, 2, 3.0}, {2, 0, 1.0}};
  DemandConfig cfg;
  cfg.window_s = 600.0;

  SUBCASE("zero demand yields an empty list") {
    cfg.total = 0;
    CHECK(generate_vehicles(od, g, cfg, 7).empty());
  }

  SUBCASE("same seed twice is identical") {
    cfg.total = 100;
    auto a = generate_vehicles(od, g, cfg, 7);
    auto b = generate_vehicles(od, g, cfg, 7);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].departure_time == b[i].departure_time);
      CHECK(a[i].od.origin == b[i].od.origin);
      CHECK(a[i].heavy == b[i].heavy);
    }
  }

  SUBCASE("3:1 rates land within a 3-sigma multinomial band") {
    cfg.total = 4000;
    auto v = generate_vehicles(od, g, cfg, 11);
    int first = 0;
    for (const auto& s : v)
      if (s.od.origin == 0) ++first;
    double sigma = std::sqrt(4000 * 0.75 * 0.25);
    CHECK(first > 3000 - 3 * sigma);
    CHECK(first < 3000 + 3 * sigma);
  }

  SUBCASE("departures stay inside the loading window") {
    cfg.total = 500;
    for (const auto& s : generate_vehicles(od, g, cfg, 3)) {
      CHECK(s.departure_time >= 0.0);
      CHECK(s.departure_time <= cfg.window_s);
    }
  }

  SUBCASE("unreachable od pair is rejected") {
    std::vector<ODPair> bad = {{0, 9, 1.0}};
    cfg.total = 10;
    CHECK_THROWS_AS(generate_vehicles(bad, g, cfg, 1), std::runtime_error);
  }
}

TEST_CASE("largest-remainder apportionment") {
  // shares indexed BEV, EFUEL, HEV, ICEV; ties go to the later fuel
  CHECK(largest_remainder({0.25, 0.25, 0.25, 0.25}, 1000) ==
        std::vector<int>{250, 250, 250, 250});
  CHECK(largest_remainder({0.0, 0.25, 0.0, 0.75}, 10) ==
        std::vector<int>{0, 2, 0, 8});
  CHECK(largest_remainder({1.0, 0.0, 0.0, 0.0}, 7) == std::vector<int>{7, 0, 0, 0});
  auto c = largest_remainder({0.1, 0.2, 0.3, 0.4}, 9);
  CHECK(c[0] + c[1] + c[2] + c[3] == 9);
}

TEST_CASE("named fleet mixes") {
  auto es = FleetMix::named("ES");
  for (int f = 0; f < 4; ++f) CHECK(es.shares[f] == doctest::Approx(0.25));
  auto m = FleetMix::named("I75E25");
  CHECK(m.share(Fuel::ICEV) == doctest::Approx(0.75));
  CHECK(m.share(Fuel::EFUEL) == doctest::Approx(0.25));
  CHECK(FleetMix::named("B100").share(Fuel::BEV) == doctest::Approx(1.0));
  CHECK(FleetMix::canonical_names().size() == 14);
  CHECK_THROWS_AS(FleetMix::named("X42"), std::runtime_error);
}

TEST_CASE("fuel and class assignment") {
  SUBCASE("ES over 1000 vehicles is exactly 250 per fuel") {
    auto fleet = dummy_fleet(1000);
    assign_fuel_and_class(fleet, FleetMix::named("ES"), 0.0, 5);
    std::map<Fuel, int> count;
    for (const auto& v : fleet) ++count[v.fuel];
    for (auto& [f, n] : count) CHECK(n == 250);
  }

  SUBCASE("I75E25 over 10 vehicles is 8 ICEV / 2 e-fuel") {
    auto fleet = dummy_fleet(10);
    assign_fuel_and_class(fleet, FleetMix::named("I75E25"), 0.0, 5);
    int icev = 0, efuel = 0;
    for (const auto& v : fleet) {
      if (v.fuel == Fuel::ICEV) ++icev;
      if (v.fuel == Fuel::EFUEL) ++efuel;
    }
    CHECK(icev == 8);
    CHECK(efuel == 2);
  }

  SUBCASE("zero market penetration keeps everyone HDV") {
    auto fleet = dummy_fleet(200);
    assign_fuel_and_class(fleet, FleetMix::named("I100"), 0.0, 5);
    for (const auto& v : fleet) CHECK(v.klass == VehClass::HDV);
  }

  SUBCASE("half market penetration is an exact split") {
    auto fleet = dummy_fleet(1000);
    assign_fuel_and_class(fleet, FleetMix::named("I100"), 0.5, 5);
    int cav = 0;
    for (const auto& v : fleet)
      if (v.klass == VehClass::CAV) ++cav;
    CHECK(cav == 500);
  }

  SUBCASE("invalid inputs are rejected") {
    auto fleet = dummy_fleet(4);
    FleetMix bad;
    bad.shares[0] = 0.5;
    CHECK_THROWS_AS(assign_fuel_and_class(fleet, bad, 0.0, 1), std::runtime_error);
    CHECK_THROWS_AS(assign_fuel_and_class(fleet, FleetMix::named("ES"), 1.5, 1),
                    std::runtime_error);
  }
}
