#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "ecosim/demand.hpp"

namespace ecosim {

enum class VspForm { Fossil, Electric };

struct VSPCoeffs {
  double a_coef = 0.156;
  double b_coef = 0.002;
  double c_coef = 0.00049;
  double mass_t = 1.5;
  VspForm form = VspForm::Fossil;
};

// kW/ton from speed (m/s) and acceleration (m/s^2). The electric form has a
// B/v term and is guarded below v_eps, returning the idle value 0.
double vsp(double v, double a, const VSPCoeffs& c, double v_eps = 0.1);

struct OpModeBin {
  int id = 0;
  double vsp_lo = -std::numeric_limits<double>::infinity();
  double vsp_hi = std::numeric_limits<double>::infinity();
  double v_lo = 0.0;
  double v_hi = std::numeric_limits<double>::infinity();
};

// Half-open [lo, hi) on both axes; bins must partition the plane.
class OpModeTable {
 public:
  explicit OpModeTable(std::vector<OpModeBin> bins);
  int classify(double vsp_val, double v) const;
  const std::vector<OpModeBin>& bins() const { return bins_; }
  int max_id() const { return max_id_; }

 private:
  std::vector<OpModeBin> bins_;
  int max_id_ = 0;
};

struct Rates {
  double ghg = 0.0;     // CO2eq g/s
  double nox = 0.0;     // g/s
  double energy = 0.0;  // kWh/s
};

enum class UpstreamBasis { PerKwh, PerLiter };

struct UpstreamFactor {
  UpstreamBasis basis = UpstreamBasis::PerKwh;
  double ghg_per_unit = 0.0;   // g per kWh or per liter
  double nox_per_unit = 0.0;
  double units_per_kwh = 1.0;  // liters per kWh for liquid fuels, 1 for electric
};

struct EmissionsConfig {
  VSPCoeffs light_fossil, light_electric, heavy_fossil, heavy_electric;
  OpModeTable opmodes{std::vector<OpModeBin>{OpModeBin{}}};
  // rates[fuel][opmode id]
  std::array<std::vector<Rates>, 4> rates;
  std::array<UpstreamFactor, 4> upstream;
  double v_eps = 0.1;

  static EmissionsConfig load(const std::string& json_path);

  const VSPCoeffs& coeffs(Fuel f, bool heavy) const;
  Rates tailpipe_rates(Fuel f, bool heavy, double v, double a) const;
  const Rates& rate(Fuel f, int opmode) const {
    return rates[static_cast<int>(f)][opmode];
  }
};

struct WtwTotals {
  double tailpipe_ghg_g = 0.0;
  double upstream_ghg_g = 0.0;
  double wtw_ghg_g = 0.0;
  double tailpipe_nox_g = 0.0;
  double upstream_nox_g = 0.0;
  double wtw_nox_g = 0.0;
};

struct VehicleEmissionTotals {
  Fuel fuel = Fuel::ICEV;
  double ghg_g = 0.0;
  double nox_g = 0.0;
  double energy_kwh = 0.0;
};

WtwTotals wtw_totals(const std::vector<VehicleEmissionTotals>& vehicles,
                     const std::array<UpstreamFactor, 4>& upstream);

// Recency-weighted mean of 60 per-second values: w_k = k / sum(k), k = 1..n.
double recency_weighted_mean(const std::vector<double>& per_second);

}  // namespace ecosim
