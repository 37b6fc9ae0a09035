#include "ecosim/ecodriving.hpp"

#include <cmath>
#include <stdexcept>

namespace ecosim {

DrivingInterval kinematics_from_distance(double distance_m, double t_s, double v_prev) {
  if (!(t_s > 0)) throw std::invalid_argument("interval length must be positive");
  if (distance_m < 0) throw std::invalid_argument("negative interval distance");
  DrivingInterval iv;
  iv.t_s = t_s;
  iv.distance_m = distance_m;
  iv.speed = distance_m / t_s;
  iv.accel = (iv.speed - v_prev) / t_s;
  if (iv.accel > 0)
    iv.phase = DrivePhase::Acceleration;
  else if (iv.accel < 0)
    iv.phase = DrivePhase::Deceleration;
  else
    iv.phase = iv.speed > 0 ? DrivePhase::Steady : DrivePhase::Stop;
  return iv;
}

double resistance_decel(double v, const ResistanceCoeffs& c) {
  return -(c.b0 + c.b1 * v + c.b2 * v * v);
}

double braking_energy(const DrivingInterval& iv, double mass_kg, const ResistanceCoeffs& c) {
  if (iv.phase != DrivePhase::Deceleration) return 0.0;
  double j_res = resistance_decel(iv.speed, c);
  double e = -c.delta * mass_kg * iv.distance_m * (iv.accel - j_res);
  // deceleration weaker than coast-down resistance means no brake application
  return std::max(0.0, e);
}

EcoCommand eco_filter(double accel_command, double speed, double downstream_speed,
                      const EcoParams& p, const ResistanceCoeffs& c) {
  EcoCommand out;
  if (accel_command < -p.b_eco) {
    // braking demand beyond the comfort envelope is never weakened
    out.accel = accel_command;
    out.emergency = true;
    return out;
  }
  double a = std::min(accel_command, p.a_eco);
  if (downstream_speed < speed - p.coast_margin) {
    // early coast-down toward the slower downstream link
    a = std::min(a, resistance_decel(speed, c));
  }
  out.accel = a;
  return out;
}

}  // namespace ecosim
