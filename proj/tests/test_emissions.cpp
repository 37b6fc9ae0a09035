#include <stdexcept>
#include <cmath>

#include "doctest.h"
#include "ecosim/emissions.hpp"

using namespace ecosim;

namespace {

const EmissionsConfig& bundled() {
  static EmissionsConfig em = EmissionsConfig::load("data/emissions.json");
  return em;
}

}  // namespace

TEST_CASE("vehicle specific power") {
  VSPCoeffs fossil;
  fossil.a_coef = 0.15;
  fossil.b_coef = 0.002;
  fossil.c_coef = 0.0005;
  fossil.mass_t = 1.5;
  fossil.form = VspForm::Fossil;

  SUBCASE("fossil form is zero at standstill for any acceleration") {
    CHECK(vsp(0.0, 0.0, fossil) == doctest::Approx(0.0));
    CHECK(vsp(0.0, 2.5, fossil) == doctest::Approx(0.0));
  }

  SUBCASE("fossil hand example") {
    // (0.15*10 + 0.002*100 + 0.0005*1000 + 1.5*10*0.5) / 1.5
    CHECK(vsp(10.0, 0.5, fossil) == doctest::Approx(9.7 / 1.5).epsilon(1e-12));
    CHECK(vsp(10.0, 0.5, fossil) == doctest::Approx(6.4667).epsilon(1e-4));
  }

  SUBCASE("electric form is guarded near standstill") {
    VSPCoeffs electric;
    electric.b_coef = 0.05;
    electric.form = VspForm::Electric;
    CHECK(vsp(0.05, 1.0, electric, 0.1) == doctest::Approx(0.0));
    CHECK(vsp(0.2, 0.0, electric, 0.1) > 0.0);
  }
}

TEST_CASE("opmode classification") {
  const auto& table = bundled().opmodes;

  SUBCASE("standstill maps to the idle bin for any vsp") {
    CHECK(table.classify(0.0, 0.0) == 0);
    CHECK(table.classify(25.0, 0.5) == 0);
    CHECK(table.classify(-4.0, 0.99) == 0);
  }

  SUBCASE("bins are half-open on both axes") {
    // a vsp boundary belongs to the bin that starts there
    CHECK(table.classify(3.0, 5.0) == table.classify(3.0001, 5.0));
    CHECK(table.classify(3.0, 5.0) != table.classify(2.9999, 5.0));
    // same for the speed-class boundary
    CHECK(table.classify(2.0, 11.176) == table.classify(2.0, 11.2));
    CHECK(table.classify(2.0, 11.176) != table.classify(2.0, 11.17));
  }

  SUBCASE("every sample of a 100x100 grid lands in exactly one bin") {
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j) {
        double v = i * 0.4;
        double p = -10.0 + j * 0.5;
        CHECK_NOTHROW(table.classify(p, v));
      }
  }

  SUBCASE("malformed tables are rejected") {
    CHECK_THROWS_AS(OpModeTable(std::vector<OpModeBin>{}), std::runtime_error);
    OpModeBin a;  // two all-covering bins overlap
    a.id = 0;
    OpModeBin b;
    b.id = 1;
    CHECK_THROWS_AS(OpModeTable({a, b}), std::runtime_error);
  }
}

TEST_CASE("tailpipe rates from the bundled tables") {
  const auto& em = bundled();

  SUBCASE("bev tailpipe is zero everywhere") {
    for (double v : {0.0, 5.0, 13.0, 25.0})
      for (double a : {-2.0, 0.0, 1.5}) {
        auto r = em.tailpipe_rates(Fuel::BEV, false, v, a);
        CHECK(r.ghg == doctest::Approx(0.0));
        CHECK(r.nox == doctest::Approx(0.0));
      }
  }

  SUBCASE("e-fuel shares opmode and energy with icev, scaled ghg") {
    double ratio = -1.0;
    for (double v : {2.0, 8.0, 13.0, 24.0})
      for (double a : {-1.0, 0.0, 1.2}) {
        auto ri = em.tailpipe_rates(Fuel::ICEV, false, v, a);
        auto re = em.tailpipe_rates(Fuel::EFUEL, false, v, a);
        CHECK(re.energy == doctest::Approx(ri.energy));
        REQUIRE(ri.ghg > 0.0);
        double r = re.ghg / ri.ghg;
        if (ratio < 0) ratio = r;
        CHECK(r == doctest::Approx(ratio));  // one config-wide factor
        CHECK(r < 1.0);
      }
  }

  SUBCASE("icev idle matches the idle-bin table entry") {
    auto r = em.tailpipe_rates(Fuel::ICEV, false, 0.0, 0.0);
    CHECK(r.ghg == doctest::Approx(em.rate(Fuel::ICEV, 0).ghg));
    CHECK(r.nox == doctest::Approx(em.rate(Fuel::ICEV, 0).nox));
  }

  SUBCASE("ghg rates are strictly ordered icev > efuel > hev > bev") {
    for (const auto& b : em.opmodes.bins()) {
      double i = em.rate(Fuel::ICEV, b.id).ghg;
      double e = em.rate(Fuel::EFUEL, b.id).ghg;
      double h = em.rate(Fuel::HEV, b.id).ghg;
      double v = em.rate(Fuel::BEV, b.id).ghg;
      CHECK(i > e);
      CHECK(e > h);
      CHECK(h > v);
      CHECK(v == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("recency-weighted mean") {
  SUBCASE("constant series is unchanged") {
    std::vector<double> s(60, 2.0);
    CHECK(recency_weighted_mean(s) == doctest::Approx(2.0));
  }

  SUBCASE("single spike at the final second") {
    std::vector<double> s(60, 0.0);
    s[59] = 61.0;
    CHECK(recency_weighted_mean(s) == doctest::Approx(61.0 * 60.0 / 1830.0));
    CHECK(recency_weighted_mean(s) == doctest::Approx(2.0));
  }

  SUBCASE("all zeros") {
    std::vector<double> s(60, 0.0);
    CHECK(recency_weighted_mean(s) == doctest::Approx(0.0));
  }
}

TEST_CASE("well-to-wheel accounting") {
  std::array<UpstreamFactor, 4> up{};  // all zero

  SUBCASE("zero upstream factors collapse wtw to tailpipe") {
    std::vector<VehicleEmissionTotals> v = {{Fuel::ICEV, 100.0, 1.0, 3.0}};
    auto w = wtw_totals(v, up);
    CHECK(w.tailpipe_ghg_g == doctest::Approx(100.0));
    CHECK(w.upstream_ghg_g == doctest::Approx(0.0));
    CHECK(w.wtw_ghg_g == doctest::Approx(100.0));
  }

  SUBCASE("one bev consuming 2 kwh at 100 g/kwh") {
    up[static_cast<int>(Fuel::BEV)] = {UpstreamBasis::PerKwh, 100.0, 0.0, 1.0};
    std::vector<VehicleEmissionTotals> v = {{Fuel::BEV, 0.0, 0.0, 2.0}};
    auto w = wtw_totals(v, up);
    CHECK(w.tailpipe_ghg_g == doctest::Approx(0.0));
    CHECK(w.upstream_ghg_g == doctest::Approx(200.0));
    CHECK(w.wtw_ghg_g == doctest::Approx(200.0));
  }

  SUBCASE("per-liter basis converts through liters per kwh") {
    up[static_cast<int>(Fuel::ICEV)] = {UpstreamBasis::PerLiter, 600.0, 1.0, 0.1};
    std::vector<VehicleEmissionTotals> v = {{Fuel::ICEV, 50.0, 0.5, 2.0}};
    auto w = wtw_totals(v, up);
    // 2 kWh -> 0.2 L -> 120 g GHG, 0.2 g NOx upstream
    CHECK(w.upstream_ghg_g == doctest::Approx(120.0));
    CHECK(w.upstream_nox_g == doctest::Approx(0.2));
    CHECK(w.wtw_ghg_g == doctest::Approx(170.0));
  }

  SUBCASE("all-bev fleet has upstream-only wtw") {
    up[static_cast<int>(Fuel::BEV)] = {UpstreamBasis::PerKwh, 150.0, 0.1, 1.0};
    std::vector<VehicleEmissionTotals> v = {{Fuel::BEV, 0.0, 0.0, 1.0},
                                            {Fuel::BEV, 0.0, 0.0, 3.0}};
    auto w = wtw_totals(v, up);
    CHECK(w.tailpipe_ghg_g == doctest::Approx(0.0));
    CHECK(w.wtw_ghg_g == doctest::Approx(w.upstream_ghg_g));
  }
}
