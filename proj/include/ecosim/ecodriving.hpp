#pragma once

#include <algorithm>

namespace ecosim {

// Coast-down coefficients for the resistance deceleration polynomial and the
// rotational-inertia factor used in the braking-energy index.
struct ResistanceCoeffs {
  double b0 = 0.175;
  double b1 = -5.63e-4;
  double b2 = 2.68e-4;
  double delta = 1.05;
  double psi = 0.015;
};

enum class DrivePhase { Acceleration, Deceleration, Steady, Stop };

struct DrivingInterval {
  double t_s = 1.0;
  double distance_m = 0.0;
  double speed = 0.0;   // V_i = S_i / t_i
  double accel = 0.0;   // j_i = (V_i - V_prev) / t_i
  DrivePhase phase = DrivePhase::Stop;
};

// V_i and j_i from distance over a measurement interval. Physical sign
// convention: positive j while speeding up.
DrivingInterval kinematics_from_distance(double distance_m, double t_s, double v_prev);

// Deceleration from road and wind resistance while free rolling: -(b0 + b1 V + b2 V^2).
double resistance_decel(double v, const ResistanceCoeffs& c);

// Brake energy dissipated over the interval, zero unless the vehicle is
// decelerating harder than coast-down resistance alone.
double braking_energy(const DrivingInterval& iv, double mass_kg, const ResistanceCoeffs& c);

struct EcoParams {
  double a_eco = 1.0;        // m/s^2 acceleration envelope
  double b_eco = 1.5;        // m/s^2 deceleration envelope
  double b_emergency = 3.0;  // commands stronger than this bypass the filter
  double coast_margin = 2.0; // m/s downstream slowdown that triggers coasting
};

struct EcoCommand {
  double accel = 0.0;
  bool emergency = false;  // filter bypassed for safety
};

// Acceleration envelope plus one-link-lookahead coasting: when the downstream
// link is slower than the current speed, cap acceleration at coast-down so the
// approach sheds speed without brake energy.
EcoCommand eco_filter(double accel_command, double speed, double downstream_speed,
                      const EcoParams& p, const ResistanceCoeffs& c);

}  // namespace ecosim
