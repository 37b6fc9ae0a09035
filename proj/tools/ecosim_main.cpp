// Command-line driver: enumerate | run | train-predictor | report.
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "ecosim/config.hpp"
#include "ecosim/csv.hpp"
#include "ecosim/predictor.hpp"
#include "ecosim/report.hpp"
#include "ecosim/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ecosim;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string out_dir_for(const ProjectConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("ECOSIM_OUT")) return env;
  return cfg.output_dir;
}

// Manifest updated via temp file + rename so readers never see a torn write.
class Manifest {
 public:
  Manifest(const std::string& out_dir, const ProjectConfig& cfg,
           const std::vector<Scenario>& scenarios)
      : path_((fs::path(out_dir) / "manifest.json").string()) {
    char hash[32];
    snprintf(hash, sizeof(hash), "%016llx",
             static_cast<unsigned long long>(cfg.config_hash));
    doc_["config_hash"] = hash;
    doc_["version"] = kVersion;
    doc_["base_seed"] = cfg.base_seed;
    doc_["replications"] = cfg.replications;
    json status = json::object();
    for (const auto& s : scenarios) status[s.label()] = "pending";
    doc_["scenarios"] = status;
    flush();
  }

  void set_status(const std::string& label, const std::string& status) {
    std::lock_guard<std::mutex> lock(mu_);
    doc_["scenarios"][label] = status;
    flush();
  }

 private:
  void flush() {
    std::string tmp = path_ + ".tmp";
    {
      std::ofstream out(tmp);
      out << doc_.dump(2) << "\n";
    }
    fs::rename(tmp, path_);
  }
  std::string path_;
  std::mutex mu_;
  json doc_;
};

ScenarioInputs make_inputs(const ProjectConfig& cfg, const NetworkGraph& graph,
                           const EmissionsConfig& emissions,
                           const std::vector<ODPair>& od,
                           std::shared_ptr<LinkForecaster> forecaster) {
  ScenarioInputs in;
  in.graph = &graph;
  in.emissions = &emissions;
  in.od = &od;
  in.demand = cfg.demand;
  in.sim = cfg.sim;
  in.forecaster = std::move(forecaster);
  return in;
}

std::shared_ptr<LinkForecaster> make_forecaster(const ProjectConfig& cfg) {
  auto load_opt = [](const std::string& p) -> std::shared_ptr<PredictorModel> {
    if (p.empty()) return nullptr;
    return std::make_shared<PredictorModel>(PredictorModel::load(p));
  };
  auto ghg = load_opt(cfg.predictor_ghg);
  auto nox = load_opt(cfg.predictor_nox);
  auto speed = load_opt(cfg.predictor_speed);
  if (!ghg && !nox && !speed)
    return std::make_shared<PersistenceForecaster>();
  return std::make_shared<TransformerForecaster>(ghg, nox, speed);
}

int cmd_enumerate(const std::string& config_path,
                  const std::vector<std::string>& mixes_override) {
  ProjectConfig cfg = ProjectConfig::load(config_path);
  std::vector<std::string> mixes =
      mixes_override.empty() ? cfg.mixes : mixes_override;
  auto scenarios = enumerate_scenarios(mixes, cfg.replications, cfg.base_seed);
  printf("%zu scenarios\n", scenarios.size());
  printf("%-6s %-12s %-4s %s\n", "mpr", "routing", "eco", "mix");
  for (const auto& s : scenarios)
    printf("%-6g %-12s %-4s %s\n", s.cav_mpr * 100.0, routing_name(s.routing),
           s.eco_driving ? "ED" : "NED", s.mix_name.c_str());
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            int jobs, const std::vector<std::string>& filter_kv,
            long long seed_override) {
  ProjectConfig cfg = ProjectConfig::load(config_path);
  if (seed_override >= 0) cfg.base_seed = static_cast<uint64_t>(seed_override);
  std::string out_dir = out_dir_for(cfg, out_flag);
  fs::create_directories(out_dir);

  NetworkGraph graph = NetworkGraph::load(cfg.nodes_csv, cfg.links_csv);
  EmissionsConfig emissions = EmissionsConfig::load(cfg.emissions_json);
  std::vector<ODPair> od = load_od_table(cfg.od_csv);
  auto forecaster = make_forecaster(cfg);
  ScenarioInputs inputs = make_inputs(cfg, graph, emissions, od, forecaster);

  auto all = enumerate_scenarios(cfg.mixes, cfg.replications, cfg.base_seed);
  auto filters = parse_filters(filter_kv);
  std::vector<Scenario> selected;
  for (const auto& s : all)
    if (scenario_matches(s, filters)) selected.push_back(s);
  printf("running %zu of %zu scenarios, %d job(s)\n", selected.size(),
         all.size(), jobs);

  Manifest manifest(out_dir, cfg, selected);
  std::vector<ScenarioResult> results(selected.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::string first_error;

  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= selected.size()) return;
      try {
        results[i] = run_scenario(selected[i], inputs);
        bool grid = results[i].used_replications <
                    static_cast<int>(results[i].replications.size());
        manifest.set_status(selected[i].label(), grid ? "gridlocked" : "done");
        if (grid) failed = true;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (first_error.empty())
          first_error = selected[i].label() + ": " + e.what();
        manifest.set_status(selected[i].label(), "error");
        failed = true;
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) {
    fprintf(stderr, "scenario failed: %s\n", first_error.c_str());
    return 1;
  }

  // monetize, scorecard over reference costs, feature importance on the
  // emission cost target
  std::vector<CostBreakdown> costs;
  std::vector<std::vector<double>> feat_rows;
  std::vector<double> target;
  for (const auto& r : results) {
    CostBreakdown c = monetize(r, cfg.costs, cfg.sim.weights);
    costs.push_back(c);
    feat_rows.push_back(scenario_features(r.scenario));
    target.push_back(c.emission_total());
  }
  std::vector<CostBreakdown> ref_costs;
  for (const auto& m : cfg.mixes)
    ref_costs.push_back(reference_costs(FleetMix::named(m), cfg.costs));
  ScoreCard card = score(cfg.mixes, ref_costs);
  FeatureImportance imp;
  if (results.size() >= 2)
    imp = feature_importance(feat_rows, scenario_feature_names(), target);
  else {
    imp.names = scenario_feature_names();
    imp.importance.assign(imp.names.size(), 0.0);
    imp.cumulative.assign(imp.names.size(), 0.0);
    imp.ranking.resize(imp.names.size());
    for (size_t i = 0; i < imp.ranking.size(); ++i) imp.ranking[i] = i;
    imp.degenerate = true;
  }

  ReportFiles files = export_all(out_dir, results, costs, imp, card);
  printf("wrote %s\n", files.results_csv.c_str());

  // summary deltas vs the 0%% CAV / UE / NED / I100 baseline
  const ScenarioResult* base = nullptr;
  for (const auto& r : results)
    if (r.scenario.cav_mpr == 0.0 && !r.scenario.eco_driving &&
        r.scenario.mix_name == "I100")
      base = &r;
  if (base && base->mean.fleet_km > 0) {
    printf("\n%-34s %12s %12s %10s\n", "scenario", "dGHG%", "dNOx%", "dTT%");
    auto pct = [](double v, double b) {
      return b != 0.0 ? 100.0 * (v - b) / b : 0.0;
    };
    for (const auto& r : results) {
      if (&r == base) continue;
      printf("%-34s %12.2f %12.2f %10.2f\n", r.scenario.label().c_str(),
             pct(r.mean.wtw.wtw_ghg_g, base->mean.wtw.wtw_ghg_g),
             pct(r.mean.wtw.wtw_nox_g, base->mean.wtw.wtw_nox_g),
             pct(r.mean.mean_tt_s, base->mean.mean_tt_s));
    }
  }
  return failed ? 1 : 0;
}

// Training series: an explicit CSV column, otherwise a trace auto-generated
// by simulating the configured fixture and concatenating per-link histories.
std::vector<double> training_series(const ProjectConfig& cfg,
                                    const std::string& channel,
                                    const std::string& series_csv) {
  StateChannel ch;
  if (channel == "ghg") ch = StateChannel::GhgEr;
  else if (channel == "nox") ch = StateChannel::NoxEr;
  else if (channel == "speed") ch = StateChannel::Speed;
  else throw CLI::ValidationError("--channel", "must be ghg, nox, or speed");

  if (!series_csv.empty()) {
    auto t = csv::Table::read_file(series_csv);
    std::vector<double> out;
    for (size_t i = 0; i < t.row_count(); ++i) out.push_back(t.num(i, "value"));
    return out;
  }

  NetworkGraph graph = NetworkGraph::load(cfg.nodes_csv, cfg.links_csv);
  EmissionsConfig emissions = EmissionsConfig::load(cfg.emissions_json);
  std::vector<ODPair> od = load_od_table(cfg.od_csv);
  auto vehicles = generate_vehicles(od, graph, cfg.demand, cfg.base_seed);
  assign_fuel_and_class(vehicles, FleetMix::named("I100"), 0.0, cfg.base_seed);
  SimConfig sim = cfg.sim;
  sim.cav_routing = Routing::UE;
  World world(graph, emissions, sim, vehicles);
  world.run_until_empty();

  std::vector<double> out;
  for (size_t l = 0; l < graph.link_count(); ++l) {
    for (const auto& s : world.store().history(static_cast<int>(l))) {
      double v = ch == StateChannel::GhgEr ? s.ghg_er
                 : ch == StateChannel::NoxEr ? s.nox_er
                                             : s.space_mean_speed;
      out.push_back(v);
    }
  }
  return out;
}

int cmd_train(const std::string& config_path, const std::string& channel,
              const std::string& series_csv, const std::string& out_flag) {
  ProjectConfig cfg = ProjectConfig::load(config_path);
  std::string out_dir = out_dir_for(cfg, out_flag);
  fs::create_directories(out_dir);

  std::vector<double> series = training_series(cfg, channel, series_csv);
  if (static_cast<int>(series.size()) <= cfg.predictor.window + 2)
    throw std::runtime_error("training series too short: " +
                             std::to_string(series.size()) + " points for window " +
                             std::to_string(cfg.predictor.window));
  auto samples = make_samples(series, cfg.predictor.window);
  PredictorModel model(cfg.predictor);
  TrainReport report;
  std::string loss_path = (fs::path(out_dir) / (channel + "_loss.csv")).string();
  try {
    report = model.train(samples);
  } catch (const std::exception& e) {
    fprintf(stderr, "training diverged: %s (loss history: %s)\n", e.what(),
            loss_path.c_str());
    return 1;
  }
  {
    csv::Writer w(loss_path);
    w.row({"epoch", "loss"});
    for (size_t e = 0; e < report.epoch_loss.size(); ++e)
      w.row({std::to_string(e + 1), fmt_num(report.epoch_loss[e])});
  }
  std::string ckpt = (fs::path(out_dir) / (channel + "_predictor.json")).string();
  model.save(ckpt);
  printf("channel %s: train RMSE %.6g, test RMSE %.6g, persistence RMSE %.6g\n",
         channel.c_str(), report.train_rmse, report.test_rmse,
         report.persistence_rmse);
  printf("checkpoint: %s\n", ckpt.c_str());
  return 0;
}

// Rebuild costs/scorecard/charts from an existing results.csv.
int cmd_report(const std::string& config_path, const std::string& out_flag) {
  ProjectConfig cfg = ProjectConfig::load(config_path);
  std::string out_dir = out_dir_for(cfg, out_flag);
  std::string results_path = (fs::path(out_dir) / "results.csv").string();
  auto t = csv::Table::read_file(results_path);

  std::vector<ScenarioResult> results;
  for (size_t i = 0; i < t.row_count(); ++i) {
    ScenarioResult r;
    r.scenario.cav_mpr = t.num(i, "cav_mpr");
    std::string routing = t.cell(i, "routing");
    for (Routing rt : {Routing::UE, Routing::Myopic, Routing::Anticipatory})
      if (routing == routing_name(rt)) r.scenario.routing = rt;
    r.scenario.eco_driving = t.cell(i, "eco") == "ED";
    r.scenario.mix_name = t.cell(i, "mix");
    r.scenario.mix = FleetMix::named(r.scenario.mix_name);
    r.used_replications = static_cast<int>(t.integer(i, "used_replications"));
    ReplicationResult& m = r.mean;
    m.wtw.tailpipe_ghg_g = t.num(i, "tailpipe_ghg_g");
    m.wtw.upstream_ghg_g = t.num(i, "upstream_ghg_g");
    m.wtw.wtw_ghg_g = t.num(i, "wtw_ghg_g");
    m.wtw.tailpipe_nox_g = t.num(i, "tailpipe_nox_g");
    m.wtw.upstream_nox_g = t.num(i, "upstream_nox_g");
    m.wtw.wtw_nox_g = t.num(i, "wtw_nox_g");
    m.mean_tt_s = t.num(i, "mean_tt_s");
    m.mean_dist_m = t.num(i, "mean_dist_m");
    m.total_tt_s = t.num(i, "total_tt_s");
    m.fleet_km = t.num(i, "fleet_km");
    m.completion_t = t.num(i, "completion_t");
    m.braking_j = t.num(i, "braking_j");
    results.push_back(std::move(r));
  }

  std::vector<CostBreakdown> costs;
  std::vector<std::vector<double>> feat_rows;
  std::vector<double> target;
  for (const auto& r : results) {
    CostBreakdown c = monetize(r, cfg.costs, cfg.sim.weights);
    costs.push_back(c);
    feat_rows.push_back(scenario_features(r.scenario));
    target.push_back(c.emission_total());
  }
  std::vector<CostBreakdown> ref_costs;
  for (const auto& m : cfg.mixes)
    ref_costs.push_back(reference_costs(FleetMix::named(m), cfg.costs));
  ScoreCard card = score(cfg.mixes, ref_costs);
  FeatureImportance imp =
      feature_importance(feat_rows, scenario_feature_names(), target);

  write_costs_csv((fs::path(out_dir) / "costs.csv").string(), results, costs);
  write_pareto_csv((fs::path(out_dir) / "pareto.csv").string(), imp);
  write_scorecard_csv((fs::path(out_dir) / "scorecard.csv").string(), card);
  auto charts = write_charts(out_dir, results, imp, card);
  printf("report regenerated in %s (%zu charts)\n", out_dir.c_str(),
         charts.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eco-routing traffic simulation scenario runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, channel = "ghg", series_csv;
  std::vector<std::string> filters, mixes;
  int jobs = 1;
  long long seed = -1;

  auto* enumerate = app.add_subcommand("enumerate", "List the scenario matrix");
  enumerate->add_option("--config", config_path, "Project config JSON")->required();
  enumerate->add_option("--mixes", mixes, "Restrict to these mixes");

  auto* run = app.add_subcommand("run", "Run scenarios and write reports");
  run->add_option("--config", config_path)->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--jobs", jobs, "Parallel scenario workers")->check(CLI::PositiveNumber);
  run->add_option("--filter", filters, "key=value scenario filter (mix, mpr, routing, eco)");
  run->add_option("--seed", seed, "Base seed override");

  auto* train = app.add_subcommand("train-predictor", "Train a link-state channel model");
  train->add_option("--config", config_path)->required();
  train->add_option("--channel", channel, "ghg | nox | speed");
  train->add_option("--series", series_csv, "CSV with a 'value' column (optional)");
  train->add_option("--out", out_dir, "Output directory");

  auto* report = app.add_subcommand("report", "Rebuild reports from results.csv");
  report->add_option("--config", config_path)->required();
  report->add_option("--out", out_dir, "Directory holding results.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (enumerate->parsed()) return cmd_enumerate(config_path, mixes);
    if (run->parsed()) return cmd_run(config_path, out_dir, jobs, filters, seed);
    if (train->parsed()) return cmd_train(config_path, channel, series_csv, out_dir);
    if (report->parsed()) return cmd_report(config_path, out_dir);
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
