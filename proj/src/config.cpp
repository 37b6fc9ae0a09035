#include "ecosim/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace ecosim {

using nlohmann::json;
namespace fs = std::filesystem;

uint64_t fnv1a_bytes(const std::string& bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) { h ^= static_cast<unsigned char>(c); h *= 1099511628211ULL; }
  return h;
}

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path q(p);
  if (q.is_absolute()) return q.string();
  return (base / q).lexically_normal().string();
}

double num_or(const json& j, const char* key, double def) {
  return j.contains(key) ? j.at(key).get<double>() : def;
}

}  // namespace

ProjectConfig ProjectConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string raw = buf.str();

  json j;
  try {
    j = json::parse(raw);
  } catch (const std::exception& e) {
    throw std::runtime_error("config parse error in " + path + ": " + e.what());
  }

  ProjectConfig cfg;
  cfg.config_hash = fnv1a_bytes(raw);
  fs::path base = fs::path(path).parent_path();

  auto require_str = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
      throw std::runtime_error("config field missing or not a string: " +
                               std::string(key));
    return j.at(key).get<std::string>();
  };
  cfg.nodes_csv = resolve(base, require_str("nodes"));
  cfg.links_csv = resolve(base, require_str("links"));
  cfg.od_csv = resolve(base, require_str("od"));
  cfg.emissions_json = resolve(base, require_str("emissions"));

  if (j.contains("mixes")) {
    for (const auto& m : j.at("mixes")) cfg.mixes.push_back(m.get<std::string>());
  } else {
    cfg.mixes = FleetMix::canonical_names();
  }
  for (const auto& m : cfg.mixes) FleetMix::named(m);  // validates the name

  cfg.replications = static_cast<int>(num_or(j, "replications", 5));
  if (cfg.replications < 1)
    throw std::runtime_error("config field invalid: replications must be >= 1");
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<uint64_t>();

  if (j.contains("demand")) {
    const json& d = j.at("demand");
    cfg.demand.total = static_cast<int>(num_or(d, "total", cfg.demand.total));
    cfg.demand.window_s = num_or(d, "window_s", cfg.demand.window_s);
    cfg.demand.heavy_share = num_or(d, "heavy_share", cfg.demand.heavy_share);
    cfg.demand.light_mass_t = num_or(d, "light_mass_t", cfg.demand.light_mass_t);
    cfg.demand.heavy_mass_t = num_or(d, "heavy_mass_t", cfg.demand.heavy_mass_t);
    if (cfg.demand.total < 1)
      throw std::runtime_error("config field invalid: demand.total must be >= 1");
  }

  if (j.contains("sim")) {
    const json& s = j.at("sim");
    cfg.sim.interval_s = static_cast<int>(num_or(s, "interval_s", cfg.sim.interval_s));
    cfg.sim.v_floor = num_or(s, "v_floor", cfg.sim.v_floor);
    cfg.sim.cav_factor = num_or(s, "cav_factor", cfg.sim.cav_factor);
    cfg.sim.max_t = num_or(s, "max_t", cfg.sim.max_t);
    cfg.sim.stall_timeout_s = num_or(s, "stall_timeout_s", cfg.sim.stall_timeout_s);
    if (s.contains("normalize_costs"))
      cfg.sim.normalize_costs = s.at("normalize_costs").get<bool>();
  }

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    cfg.sim.weights.beta_t = num_or(w, "beta_t", cfg.sim.weights.beta_t);
    cfg.sim.weights.beta_ghg = num_or(w, "beta_ghg", cfg.sim.weights.beta_ghg);
    cfg.sim.weights.beta_nox = num_or(w, "beta_nox", cfg.sim.weights.beta_nox);
    cfg.sim.weights.w_t = num_or(w, "w_t", cfg.sim.weights.w_t);
    cfg.sim.weights.w_ghg = num_or(w, "w_ghg", cfg.sim.weights.w_ghg);
    cfg.sim.weights.w_nox = num_or(w, "w_nox", cfg.sim.weights.w_nox);
  }

  if (j.contains("costs")) {
    const json& c = j.at("costs");
    cfg.costs.lifetime_km = num_or(c, "lifetime_km", cfg.costs.lifetime_km);
    cfg.costs.travel_time_perkm =
        num_or(c, "travel_time_perkm", cfg.costs.travel_time_perkm);
    if (c.contains("per_fuel")) {
      for (const auto& [name, v] : c.at("per_fuel").items()) {
        int f = -1;
        for (int i = 0; i < 4; ++i)
          if (name == fuel_name(static_cast<Fuel>(i))) f = i;
        if (f < 0) throw std::runtime_error("config: unknown fuel in costs: " + name);
        FuelCostRates& r = cfg.costs.per_fuel[f];
        r.ghg_perkm = num_or(v, "ghg_perkm", r.ghg_perkm);
        r.nox_perkm = num_or(v, "nox_perkm", r.nox_perkm);
        r.fuel_perkm = num_or(v, "fuel_perkm", r.fuel_perkm);
        r.om_perkm = num_or(v, "om_perkm", r.om_perkm);
        r.vehicle_price = num_or(v, "vehicle_price", r.vehicle_price);
      }
    }
  }

  if (j.contains("predictor")) {
    const json& p = j.at("predictor");
    cfg.predictor.window = static_cast<int>(num_or(p, "window", cfg.predictor.window));
    cfg.predictor.embed_dim =
        static_cast<int>(num_or(p, "embed_dim", cfg.predictor.embed_dim));
    cfg.predictor.heads = static_cast<int>(num_or(p, "heads", cfg.predictor.heads));
    cfg.predictor.ffn_dim = static_cast<int>(num_or(p, "ffn_dim", cfg.predictor.ffn_dim));
    cfg.predictor.epochs = static_cast<int>(num_or(p, "epochs", cfg.predictor.epochs));
    cfg.predictor.batch_size =
        static_cast<int>(num_or(p, "batch_size", cfg.predictor.batch_size));
    cfg.predictor.lr = num_or(p, "lr", cfg.predictor.lr);
    cfg.predictor.lr_decay = num_or(p, "lr_decay", cfg.predictor.lr_decay);
    cfg.predictor.validate();
    if (p.contains("ghg_checkpoint"))
      cfg.predictor_ghg = resolve(base, p.at("ghg_checkpoint").get<std::string>());
    if (p.contains("nox_checkpoint"))
      cfg.predictor_nox = resolve(base, p.at("nox_checkpoint").get<std::string>());
    if (p.contains("speed_checkpoint"))
      cfg.predictor_speed = resolve(base, p.at("speed_checkpoint").get<std::string>());
  }

  if (j.contains("output_dir"))
    cfg.output_dir = resolve(base, j.at("output_dir").get<std::string>());

  return cfg;
}

std::map<std::string, std::string> parse_filters(const std::vector<std::string>& kv) {
  std::map<std::string, std::string> out;
  for (const auto& s : kv) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= s.size())
      throw std::runtime_error("bad --filter, expected key=value: " + s);
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

bool scenario_matches(const Scenario& s,
                      const std::map<std::string, std::string>& filters) {
  for (const auto& [key, value] : filters) {
    if (key == "mix") {
      if (s.mix_name != value) return false;
    } else if (key == "mpr") {
      if (std::abs(s.cav_mpr - std::stod(value)) > 1e-12) return false;
    } else if (key == "routing") {
      if (value != routing_name(s.routing)) return false;
    } else if (key == "eco") {
      bool want;
      if (value == "ED" || value == "ed" || value == "1") want = true;
      else if (value == "NED" || value == "ned" || value == "0") want = false;
      else throw std::runtime_error("bad eco filter value: " + value);
      if (s.eco_driving != want) return false;
    } else {
      throw std::runtime_error("unknown filter key: " + key);
    }
  }
  return true;
}

}  // namespace ecosim
