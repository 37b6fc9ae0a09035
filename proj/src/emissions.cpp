#include "ecosim/emissions.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ecosim {

using nlohmann::json;

double vsp(double v, double a, const VSPCoeffs& c, double v_eps) {
  if (c.form == VspForm::Electric) {
    if (v < v_eps) return 0.0;
    return (c.a_coef * v + c.b_coef / v + c.c_coef * v * v + c.mass_t * v * a) / c.mass_t;
  }
  return (c.a_coef * v + c.b_coef * v * v + c.c_coef * v * v * v + c.mass_t * v * a) /
         c.mass_t;
}

OpModeTable::OpModeTable(std::vector<OpModeBin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw std::runtime_error("opmode table is empty");
  std::set<int> ids;
  for (const auto& b : bins_) {
    if (!ids.insert(b.id).second)
      throw std::runtime_error("duplicate opmode id " + std::to_string(b.id));
    if (b.id > max_id_) max_id_ = b.id;
  }
  // spot-check the partition on a sample grid: every point in exactly one bin
  for (double v = 0.0; v < 45.0; v += 1.7) {
    for (double p = -35.0; p < 55.0; p += 2.3) {
      int hits = 0;
      for (const auto& b : bins_)
        if (p >= b.vsp_lo && p < b.vsp_hi && v >= b.v_lo && v < b.v_hi) ++hits;
      if (hits != 1)
        throw std::runtime_error("opmode bins do not partition the plane at v=" +
                                 std::to_string(v) + " vsp=" + std::to_string(p));
    }
  }
}

int OpModeTable::classify(double vsp_val, double v) const {
  for (const auto& b : bins_)
    if (vsp_val >= b.vsp_lo && vsp_val < b.vsp_hi && v >= b.v_lo && v < b.v_hi)
      return b.id;
  throw std::logic_error("opmode classify fell through a validated partition");
}

namespace {

VSPCoeffs parse_coeffs(const json& j, VspForm form) {
  VSPCoeffs c;
  c.a_coef = j.at("a").get<double>();
  c.b_coef = j.at("b").get<double>();
  c.c_coef = j.at("c").get<double>();
  c.mass_t = j.at("mass_t").get<double>();
  c.form = form;
  if (!(c.mass_t > 0)) throw std::runtime_error("vsp mass must be positive");
  return c;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::runtime_error("unknown key '" + it.key() + "' in " + where);
}

int fuel_from_name(const std::string& s) {
  for (int f = 0; f < 4; ++f)
    if (s == fuel_name(static_cast<Fuel>(f))) return f;
  throw std::runtime_error("unknown fuel '" + s + "' in emissions config");
}

}  // namespace

EmissionsConfig EmissionsConfig::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open emissions config: " + json_path);
  json j = json::parse(in);

  reject_unknown(j, {"schema_version", "vsp", "opmode_bins", "rates", "upstream", "v_eps"},
                 "emissions config");
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("unsupported emissions config schema version");

  EmissionsConfig cfg;
  const auto& vspj = j.at("vsp");
  cfg.light_fossil = parse_coeffs(vspj.at("light").at("fossil"), VspForm::Fossil);
  cfg.light_electric = parse_coeffs(vspj.at("light").at("electric"), VspForm::Electric);
  cfg.heavy_fossil = parse_coeffs(vspj.at("heavy").at("fossil"), VspForm::Fossil);
  cfg.heavy_electric = parse_coeffs(vspj.at("heavy").at("electric"), VspForm::Electric);
  if (j.contains("v_eps")) cfg.v_eps = j.at("v_eps").get<double>();

  std::vector<OpModeBin> bins;
  for (const auto& bj : j.at("opmode_bins")) {
    OpModeBin b;
    b.id = bj.at("id").get<int>();
    if (bj.contains("vsp_lo")) b.vsp_lo = bj.at("vsp_lo").get<double>();
    if (bj.contains("vsp_hi")) b.vsp_hi = bj.at("vsp_hi").get<double>();
    if (bj.contains("v_lo")) b.v_lo = bj.at("v_lo").get<double>();
    if (bj.contains("v_hi")) b.v_hi = bj.at("v_hi").get<double>();
    bins.push_back(b);
  }
  cfg.opmodes = OpModeTable(std::move(bins));

  for (auto& v : cfg.rates) v.assign(cfg.opmodes.max_id() + 1, Rates{});
  std::array<std::vector<char>, 4> present;
  for (auto& p : present) p.assign(cfg.opmodes.max_id() + 1, 0);
  for (auto it = j.at("rates").begin(); it != j.at("rates").end(); ++it) {
    int f = fuel_from_name(it.key());
    for (auto rit = it.value().begin(); rit != it.value().end(); ++rit) {
      int op = std::stoi(rit.key());
      if (op < 0 || op > cfg.opmodes.max_id())
        throw std::runtime_error("rate for unknown opmode " + rit.key());
      Rates r;
      r.ghg = rit.value().at("ghg").get<double>();
      r.nox = rit.value().at("nox").get<double>();
      r.energy = rit.value().at("energy").get<double>();
      if (r.ghg < 0 || r.nox < 0 || r.energy < 0)
        throw std::runtime_error("negative emission rate for " + it.key() +
                                 " opmode " + rit.key());
      cfg.rates[f][op] = r;
      present[f][op] = 1;
    }
  }
  for (const auto& b : cfg.opmodes.bins())
    for (int f = 0; f < 4; ++f)
      if (!present[f][b.id])
        throw std::runtime_error(std::string("missing rate entry for ") +
                                 fuel_name(static_cast<Fuel>(f)) + " opmode " +
                                 std::to_string(b.id));
  // BEV tailpipe pollutants must be zero everywhere
  for (const auto& b : cfg.opmodes.bins()) {
    const auto& r = cfg.rates[static_cast<int>(Fuel::BEV)][b.id];
    if (r.ghg != 0.0 || r.nox != 0.0)
      throw std::runtime_error("BEV tailpipe rates must be zero (opmode " +
                               std::to_string(b.id) + ")");
  }

  for (auto it = j.at("upstream").begin(); it != j.at("upstream").end(); ++it) {
    int f = fuel_from_name(it.key());
    UpstreamFactor u;
    std::string basis = it.value().at("basis").get<std::string>();
    if (basis == "per_kwh") u.basis = UpstreamBasis::PerKwh;
    else if (basis == "per_liter") u.basis = UpstreamBasis::PerLiter;
    else throw std::runtime_error("unknown upstream basis '" + basis + "'");
    u.ghg_per_unit = it.value().at("ghg_per_unit").get<double>();
    u.nox_per_unit = it.value().at("nox_per_unit").get<double>();
    if (it.value().contains("units_per_kwh"))
      u.units_per_kwh = it.value().at("units_per_kwh").get<double>();
    if (u.ghg_per_unit < 0 || u.nox_per_unit < 0 || u.units_per_kwh < 0)
      throw std::runtime_error("negative upstream factor for " + it.key());
    cfg.upstream[f] = u;
  }
  return cfg;
}

const VSPCoeffs& EmissionsConfig::coeffs(Fuel f, bool heavy) const {
  bool electric = f == Fuel::BEV;
  if (heavy) return electric ? heavy_electric : heavy_fossil;
  return electric ? light_electric : light_fossil;
}

Rates EmissionsConfig::tailpipe_rates(Fuel f, bool heavy, double v, double a) const {
  // e-fuel shares the ICEV energy model; HEV and BEV use their own tables
  const VSPCoeffs& c = coeffs(f, heavy);
  double p = vsp(v, a, c, v_eps);
  int op = opmodes.classify(p, v);
  return rates[static_cast<int>(f)][op];
}

WtwTotals wtw_totals(const std::vector<VehicleEmissionTotals>& vehicles,
                     const std::array<UpstreamFactor, 4>& upstream) {
  WtwTotals t;
  for (const auto& v : vehicles) {
    const auto& u = upstream[static_cast<int>(v.fuel)];
    double units = v.energy_kwh * (u.basis == UpstreamBasis::PerLiter ? u.units_per_kwh : 1.0);
    t.tailpipe_ghg_g += v.ghg_g;
    t.tailpipe_nox_g += v.nox_g;
    t.upstream_ghg_g += units * u.ghg_per_unit;
    t.upstream_nox_g += units * u.nox_per_unit;
  }
  t.wtw_ghg_g = t.tailpipe_ghg_g + t.upstream_ghg_g;
  t.wtw_nox_g = t.tailpipe_nox_g + t.upstream_nox_g;
  return t;
}

double recency_weighted_mean(const std::vector<double>& per_second) {
  size_t n = per_second.size();
  if (n == 0) return 0.0;
  double wsum = 0.0, acc = 0.0;
  for (size_t k = 1; k <= n; ++k) {
    wsum += static_cast<double>(k);
    acc += static_cast<double>(k) * per_second[k - 1];
  }
  return acc / wsum;
}

}  // namespace ecosim
