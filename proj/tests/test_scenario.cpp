#include <stdexcept>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ecosim/scenario.hpp"

using namespace ecosim;

namespace {

struct Fixture {
  NetworkGraph graph;
  EmissionsConfig emissions;
  std::vector<ODPair> od;

  Fixture()
      : graph(NetworkGraph::load("data/grid10/nodes.csv", "data/grid10/links.csv")),
        emissions(EmissionsConfig::load("data/emissions.json")),
        od(load_od_table("data/od.csv")) {}

  ScenarioInputs inputs(int total) {
    ScenarioInputs in;
    in.graph = &graph;
    in.emissions = &emissions;
    in.od = &od;
    in.demand.total = total;
    in.demand.window_s = 200.0;
    return in;
  }
};

Scenario make_scenario(const std::string& mix, double mpr, Routing routing,
                       bool eco, int reps = 2) {
  Scenario s;
  s.cav_mpr = mpr;
  s.routing = routing;
  s.eco_driving = eco;
  s.mix_name = mix;
  s.mix = FleetMix::named(mix);
  s.replications = reps;
  s.base_seed = 42;
  return s;
}

}  // namespace

TEST_CASE("scenario enumeration") {
  auto all = FleetMix::canonical_names();

  SUBCASE("defaults give exactly 140 scenarios") {
    auto s = enumerate_scenarios(all, 5, 42);
    CHECK(s.size() == 140);
    CHECK(s.front().label() == "mpr0_UE_ED_I100");
    CHECK(s.back().label() == "mpr100_A_NED_I75E25");
  }

  SUBCASE("one mix gives the 10-cell column") {
    auto s = enumerate_scenarios({"B100"}, 5, 42);
    CHECK(s.size() == 10);
  }

  SUBCASE("duplicate mixes are rejected") {
    CHECK_THROWS_AS(enumerate_scenarios({"B100", "B100"}, 5, 42),
                    std::runtime_error);
  }

  SUBCASE("labels and hashes are unique") {
    auto s = enumerate_scenarios(all, 5, 42);
    std::set<std::string> labels;
    std::set<uint64_t> hashes;
    for (const auto& sc : s) {
      labels.insert(sc.label());
      hashes.insert(sc.id_hash());
    }
    CHECK(labels.size() == s.size());
    CHECK(hashes.size() == s.size());
  }

  SUBCASE("label format") {
    CHECK(make_scenario("I100", 0.5, Routing::Myopic, true).label() ==
          "mpr50_M_ED_I100");
    CHECK(make_scenario("ES", 0.0, Routing::UE, false).label() == "mpr0_UE_NED_ES");
  }
}

TEST_CASE("scenario runs on the bundled fixture") {
  Fixture fx;

  SUBCASE("b100 has zero tailpipe emissions") {
    auto r = run_scenario(make_scenario("B100", 0.5, Routing::Myopic, false),
                          fx.inputs(120));
    CHECK(r.used_replications == 2);
    CHECK(r.mean.wtw.tailpipe_ghg_g == 0.0);
    CHECK(r.mean.wtw.tailpipe_nox_g == 0.0);
    CHECK(r.mean.wtw.upstream_ghg_g > 0.0);
  }

  SUBCASE("identical scenarios give identical results") {
    auto s = make_scenario("ES", 0.5, Routing::Myopic, true);
    auto a = run_scenario(s, fx.inputs(100));
    auto b = run_scenario(s, fx.inputs(100));
    CHECK(a.mean.wtw.wtw_ghg_g == b.mean.wtw.wtw_ghg_g);
    CHECK(a.mean.mean_tt_s == b.mean.mean_tt_s);
    CHECK(a.mean.fleet_km == b.mean.fleet_km);
  }

  SUBCASE("i100 emits more wtw ghg than b100 on identical seeds") {
    auto ri = run_scenario(make_scenario("I100", 0.0, Routing::UE, false),
                           fx.inputs(150));
    auto rb = run_scenario(make_scenario("B100", 0.0, Routing::UE, false),
                           fx.inputs(150));
    CHECK(ri.mean.wtw.wtw_ghg_g > rb.mean.wtw.wtw_ghg_g);
  }

  SUBCASE("replication results carry matched conservation counterparts") {
    auto r = run_scenario(make_scenario("ES", 0.5, Routing::Myopic, false),
                          fx.inputs(150));
    for (const auto& rep : r.replications) {
      CHECK(rep.link_ghg_g ==
            doctest::Approx(rep.vehicle_ghg_g).epsilon(1e-6));
      CHECK(rep.link_nox_g ==
            doctest::Approx(rep.vehicle_nox_g).epsilon(1e-6));
      CHECK(rep.link_vehicle_seconds ==
            doctest::Approx(rep.vehicle_seconds).epsilon(1e-6));
    }
  }
}

TEST_CASE("cost reference and scorecard") {
  auto ref = CostReference::defaults();

  SUBCASE("per-km defaults") {
    CHECK(ref.per_fuel[static_cast<int>(Fuel::ICEV)].ghg_perkm ==
          doctest::Approx(0.50));
    CHECK(ref.per_fuel[static_cast<int>(Fuel::BEV)].nox_perkm ==
          doctest::Approx(0.01));
  }

  SUBCASE("blended fuel cost of a 50/50 mix") {
    auto c = reference_costs(FleetMix::named("I50B50"), ref);
    double icev = ref.per_fuel[static_cast<int>(Fuel::ICEV)].fuel_perkm;
    double bev = ref.per_fuel[static_cast<int>(Fuel::BEV)].fuel_perkm;
    CHECK(c.fuel == doctest::Approx((icev + bev) / 2.0));
    CHECK(c.fuel == doctest::Approx(0.12));
  }

  SUBCASE("score examples") {
    CostBreakdown a, b;
    a.ghg_emission = 0.08;
    b.ghg_emission = 0.50;
    a.fuel = 0.30;
    b.fuel = 0.30;
    auto card = score({"A", "B"}, {a, b});
    CHECK(card.emission_score[0] == doctest::Approx(50.0));
    CHECK(card.emission_score[1] == doctest::Approx(8.0));
    CHECK(card.other_score[0] == doctest::Approx(50.0));
    CHECK(card.other_score[1] == doctest::Approx(50.0));
  }

  SUBCASE("equal costs all score 50 and higher cost scores strictly lower") {
    CostBreakdown a, b, c;
    a.ghg_emission = b.ghg_emission = c.ghg_emission = 0.2;
    a.fuel = 0.10;
    b.fuel = 0.10;
    c.fuel = 0.25;
    auto card = score({"A", "B", "C"}, {a, b, c});
    for (double s : card.emission_score) CHECK(s == doctest::Approx(50.0));
    CHECK(card.other_score[0] == doctest::Approx(50.0));
    CHECK(card.other_score[2] < card.other_score[0]);
  }

  SUBCASE("invalid score inputs") {
    CHECK_THROWS_AS(score({}, {}), std::runtime_error);
    CostBreakdown zero;  // non-positive column
    CHECK_THROWS_AS(score({"A"}, {zero}), std::runtime_error);
  }
}

TEST_CASE("feature importance") {
  auto scenarios = enumerate_scenarios(FleetMix::canonical_names(), 5, 42);
  std::vector<std::vector<double>> rows;
  for (const auto& s : scenarios) rows.push_back(scenario_features(s));
  const auto& names = scenario_feature_names();

  SUBCASE("planted bev signal dominates") {
    std::vector<double> target;
    for (size_t i = 0; i < rows.size(); ++i) {
      double noise = 0.01 * std::sin(static_cast<double>(i));
      target.push_back(10.0 * rows[i][2] + noise);  // bev_share column
    }
    auto imp = feature_importance(rows, names, target);
    REQUIRE_FALSE(imp.degenerate);
    CHECK(names[imp.ranking[0]] == "bev_share");
    CHECK(imp.importance[imp.ranking[0]] > 0.5);
    double sum = 0.0;
    for (double v : imp.importance) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(imp.cumulative.back() == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("constant target is degenerate with zero importances") {
    std::vector<double> target(rows.size(), 3.0);
    auto imp = feature_importance(rows, names, target);
    CHECK(imp.degenerate);
    for (double v : imp.importance) CHECK(v == doctest::Approx(0.0));
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(feature_importance({rows[0]}, names, {1.0}), std::runtime_error);
  }
}
