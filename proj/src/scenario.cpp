#include "ecosim/scenario.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ecosim {

std::string Scenario::label() const {
  char mpr[16];
  snprintf(mpr, sizeof(mpr), "%g", cav_mpr * 100.0);
  return std::string("mpr") + mpr + "_" + routing_name(routing) + "_" +
         (eco_driving ? "ED" : "NED") + "_" + mix_name;
}

uint64_t Scenario::id_hash() const {
  std::string key = label() + "#" + std::to_string(base_seed) + "#" +
                    std::to_string(replications);
  uint64_t h = 14695981039346656037ULL;
  for (char c : key) { h ^= static_cast<unsigned char>(c); h *= 1099511628211ULL; }
  return h;
}

std::vector<Scenario> enumerate_scenarios(const std::vector<std::string>& mixes,
                                          int replications, uint64_t base_seed) {
  std::set<std::string> seen;
  for (const auto& m : mixes)
    if (!seen.insert(m).second)
      throw std::runtime_error("duplicate mix in config: " + m);

  struct Cell { double mpr; Routing routing; };
  static const Cell cells[] = {{0.0, Routing::UE},
                               {0.5, Routing::Myopic},
                               {0.5, Routing::Anticipatory},
                               {1.0, Routing::Myopic},
                               {1.0, Routing::Anticipatory}};
  std::vector<Scenario> out;
  for (const auto& cell : cells) {
    for (bool eco : {true, false}) {
      for (const auto& mix : mixes) {
        Scenario s;
        s.cav_mpr = cell.mpr;
        s.routing = cell.routing;
        s.eco_driving = eco;
        s.mix_name = mix;
        s.mix = FleetMix::named(mix);
        s.replications = replications;
        s.base_seed = base_seed;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

ScenarioResult run_scenario(const Scenario& scenario, const ScenarioInputs& inputs) {
  ScenarioResult result;
  result.scenario = scenario;

  for (int rep = 0; rep < scenario.replications; ++rep) {
    uint64_t seed = scenario.base_seed + rep;
    auto vehicles = generate_vehicles(*inputs.od, *inputs.graph, inputs.demand, seed);
    assign_fuel_and_class(vehicles, scenario.mix, scenario.cav_mpr, seed);

    SimConfig sim = inputs.sim;
    sim.eco_enabled = scenario.eco_driving;
    sim.cav_routing = scenario.routing;

    World world(*inputs.graph, *inputs.emissions, sim, vehicles);
    if (scenario.routing == Routing::Anticipatory && inputs.forecaster)
      world.set_forecaster(inputs.forecaster);
    RunResult run = world.run_until_empty();

    ReplicationResult r;
    r.gridlocked = run.gridlocked;
    r.completion_t = run.completion_t;
    r.wtw = wtw_totals(world.vehicle_emission_totals(), inputs.emissions->upstream);
    r.mean_tt_s = world.completed_mean_tt_s();
    r.mean_dist_m = world.completed_mean_dist_m();
    r.total_tt_s = world.total_travel_time_s();
    r.fleet_km = world.total_distance_m() / 1000.0;
    r.braking_j = world.total_braking_j();
    r.vehicle_ghg_g = r.wtw.tailpipe_ghg_g;
    r.link_ghg_g = world.link_aggregate_ghg_g();
    r.vehicle_nox_g = r.wtw.tailpipe_nox_g;
    r.link_nox_g = world.link_aggregate_nox_g();
    r.vehicle_seconds = world.simulated_vehicle_seconds();
    r.link_vehicle_seconds = world.link_aggregate_vehicle_seconds();
    result.replications.push_back(r);
  }

  // mean over ungridlocked replications
  ReplicationResult& m = result.mean;
  int n = 0;
  for (const auto& r : result.replications) {
    if (r.gridlocked) continue;
    ++n;
    m.wtw.tailpipe_ghg_g += r.wtw.tailpipe_ghg_g;
    m.wtw.upstream_ghg_g += r.wtw.upstream_ghg_g;
    m.wtw.wtw_ghg_g += r.wtw.wtw_ghg_g;
    m.wtw.tailpipe_nox_g += r.wtw.tailpipe_nox_g;
    m.wtw.upstream_nox_g += r.wtw.upstream_nox_g;
    m.wtw.wtw_nox_g += r.wtw.wtw_nox_g;
    m.mean_tt_s += r.mean_tt_s;
    m.mean_dist_m += r.mean_dist_m;
    m.total_tt_s += r.total_tt_s;
    m.fleet_km += r.fleet_km;
    m.completion_t += r.completion_t;
    m.braking_j += r.braking_j;
  }
  result.used_replications = n;
  if (n > 0) {
    double inv = 1.0 / n;
    m.wtw.tailpipe_ghg_g *= inv;
    m.wtw.upstream_ghg_g *= inv;
    m.wtw.wtw_ghg_g *= inv;
    m.wtw.tailpipe_nox_g *= inv;
    m.wtw.upstream_nox_g *= inv;
    m.wtw.wtw_nox_g *= inv;
    m.mean_tt_s *= inv;
    m.mean_dist_m *= inv;
    m.total_tt_s *= inv;
    m.fleet_km *= inv;
    m.completion_t *= inv;
    m.braking_j *= inv;
  }
  return result;
}

CostReference CostReference::defaults() {
  CostReference r;
  auto& bev = r.per_fuel[static_cast<int>(Fuel::BEV)];
  bev = {0.08, 0.01, 0.10, 0.05, 56000.0};
  auto& efuel = r.per_fuel[static_cast<int>(Fuel::EFUEL)];
  efuel = {0.45, 0.11, 0.22, 0.08, 38000.0};
  auto& hev = r.per_fuel[static_cast<int>(Fuel::HEV)];
  hev = {0.30, 0.08, 0.12, 0.06, 46000.0};
  auto& icev = r.per_fuel[static_cast<int>(Fuel::ICEV)];
  icev = {0.50, 0.12, 0.14, 0.08, 35000.0};
  r.lifetime_km = 200000.0;
  r.travel_time_perkm = 0.0;
  return r;
}

CostBreakdown monetize(const ScenarioResult& result, const CostReference& ref,
                       const CostWeights& betas) {
  CostBreakdown c;
  double km = result.mean.fleet_km;
  if (!(km > 0)) throw std::runtime_error("zero fleet-km, per-km costs undefined");
  c.ghg_emission = result.mean.wtw.wtw_ghg_g * betas.beta_ghg / km;
  c.nox_emission = result.mean.wtw.wtw_nox_g * betas.beta_nox / km;
  c.travel_time = result.mean.total_tt_s * betas.beta_t / km;
  const FleetMix& mix = result.scenario.mix;
  for (int f = 0; f < 4; ++f) {
    double s = mix.shares[f];
    c.fuel += s * ref.per_fuel[f].fuel_perkm;
    c.om += s * ref.per_fuel[f].om_perkm;
    c.vehicle_capital += s * ref.capital_perkm(static_cast<Fuel>(f));
  }
  return c;
}

CostBreakdown reference_costs(const FleetMix& mix, const CostReference& ref) {
  CostBreakdown c;
  c.travel_time = ref.travel_time_perkm;
  for (int f = 0; f < 4; ++f) {
    double s = mix.shares[f];
    c.ghg_emission += s * ref.per_fuel[f].ghg_perkm;
    c.nox_emission += s * ref.per_fuel[f].nox_perkm;
    c.fuel += s * ref.per_fuel[f].fuel_perkm;
    c.om += s * ref.per_fuel[f].om_perkm;
    c.vehicle_capital += s * ref.capital_perkm(static_cast<Fuel>(f));
  }
  return c;
}

ScoreCard score(const std::vector<std::string>& mixes,
                const std::vector<CostBreakdown>& costs) {
  if (mixes.size() != costs.size() || mixes.empty())
    throw std::runtime_error("score: mismatched or empty cost table");
  double e_min = 1e300, o_min = 1e300;
  for (const auto& c : costs) {
    if (!(c.emission_total() > 0) || !(c.other_total() > 0))
      throw std::runtime_error("score: non-positive cost column");
    e_min = std::min(e_min, c.emission_total());
    o_min = std::min(o_min, c.other_total());
  }
  ScoreCard card;
  card.mix = mixes;
  for (const auto& c : costs) {
    card.emission_score.push_back(50.0 * e_min / c.emission_total());
    card.other_score.push_back(50.0 * o_min / c.other_total());
  }
  return card;
}

std::vector<double> scenario_features(const Scenario& s) {
  return {s.mix.share(Fuel::ICEV), s.mix.share(Fuel::HEV), s.mix.share(Fuel::BEV),
          s.mix.share(Fuel::EFUEL), s.cav_mpr,
          s.routing == Routing::Anticipatory ? 1.0 : 0.0,
          s.eco_driving ? 1.0 : 0.0};
}

const std::vector<std::string>& scenario_feature_names() {
  static const std::vector<std::string> names = {
      "icev_share", "hev_share", "bev_share", "efuel_share",
      "cav_mpr",    "anticipatory", "eco_driving"};
  return names;
}

FeatureImportance feature_importance(const std::vector<std::vector<double>>& rows,
                                     const std::vector<std::string>& names,
                                     const std::vector<double>& target) {
  size_t n = rows.size();
  size_t k = names.size();
  if (n < 2) throw std::runtime_error("feature importance needs >= 2 rows");
  for (const auto& r : rows)
    if (r.size() != k) throw std::runtime_error("feature row width mismatch");

  FeatureImportance out;
  out.names = names;
  out.importance.assign(k, 0.0);

  // standardize target; constant target is degenerate
  double ymean = std::accumulate(target.begin(), target.end(), 0.0) / n;
  double yvar = 0;
  for (double y : target) yvar += (y - ymean) * (y - ymean);
  yvar /= n;
  if (yvar <= 1e-24) {
    out.degenerate = true;
    out.cumulative.assign(k, 0.0);
    out.ranking.resize(k);
    std::iota(out.ranking.begin(), out.ranking.end(), size_t{0});
    return out;
  }
  double ystd = std::sqrt(yvar);

  // standardize features; constant columns are aliased out up front
  Eigen::MatrixXd X(n, k);
  std::vector<bool> keep(k, true);
  for (size_t j = 0; j < k; ++j) {
    double mean = 0;
    for (size_t i = 0; i < n; ++i) mean += rows[i][j];
    mean /= n;
    double var = 0;
    for (size_t i = 0; i < n; ++i) var += (rows[i][j] - mean) * (rows[i][j] - mean);
    var /= n;
    if (var <= 1e-24) {
      keep[j] = false;
      out.dropped.push_back(names[j] + " (constant)");
      X.col(j).setZero();
    } else {
      double sd = std::sqrt(var);
      for (size_t i = 0; i < n; ++i) X(i, j) = (rows[i][j] - mean) / sd;
    }
  }
  std::vector<size_t> active;
  for (size_t j = 0; j < k; ++j)
    if (keep[j]) active.push_back(j);
  if (active.empty()) {
    out.degenerate = true;
    out.cumulative.assign(k, 0.0);
    out.ranking.resize(k);
    std::iota(out.ranking.begin(), out.ranking.end(), size_t{0});
    return out;
  }

  Eigen::MatrixXd A(n, active.size());
  for (size_t j = 0; j < active.size(); ++j) A.col(j) = X.col(active[j]);
  Eigen::VectorXd y(n);
  for (size_t i = 0; i < n; ++i) y(i) = (target[i] - ymean) / ystd;

  // Resolve aliased (linearly dependent) columns by greedily keeping a
  // maximal independent set, visiting columns in order of marginal
  // correlation with the target so collinear groups keep their strongest
  // member rather than an arbitrary pivot.
  {
    std::vector<size_t> order = active;
    auto corr = [&](size_t j) { return std::abs(X.col(j).dot(y)) / n; };
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return corr(a) > corr(b); });
    std::vector<size_t> chosen;
    Eigen::MatrixXd C(n, 0);
    for (size_t j : order) {
      Eigen::MatrixXd trial(n, C.cols() + 1);
      trial << C, X.col(j);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
      qr.setThreshold(1e-9);
      if (qr.rank() == trial.cols()) {
        chosen.push_back(j);
        C = trial;
      }
    }
    std::set<size_t> kept_set(chosen.begin(), chosen.end());
    std::vector<size_t> new_active;
    for (size_t j : active) {
      if (kept_set.count(j)) new_active.push_back(j);
      else out.dropped.push_back(names[j] + " (aliased)");
    }
    active = new_active;
    Eigen::MatrixXd A2(n, active.size());
    for (size_t j = 0; j < active.size(); ++j) A2.col(j) = X.col(active[j]);
    A = A2;
  }

  Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  double total = coef.cwiseAbs().sum();
  if (total <= 1e-15) {
    out.degenerate = true;
  } else {
    for (size_t j = 0; j < active.size(); ++j)
      out.importance[active[j]] = std::abs(coef(j)) / total;
  }

  out.ranking.resize(k);
  std::iota(out.ranking.begin(), out.ranking.end(), size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [&](size_t a, size_t b) { return out.importance[a] > out.importance[b]; });
  out.cumulative.resize(k);
  double run = 0;
  for (size_t j = 0; j < k; ++j) {
    run += out.importance[out.ranking[j]];
    out.cumulative[j] = run;
  }
  return out;
}

}  // namespace ecosim
