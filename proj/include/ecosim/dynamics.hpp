#pragma once

#include <optional>

namespace ecosim {

struct IDMParams {
  double v0 = 13.89;     // desired speed m/s (overridden by link free-flow speed)
  double T = 1.5;        // time headway s
  double s0 = 2.0;       // minimum gap m
  double a_max = 1.5;    // m/s^2
  double b = 2.0;        // comfortable deceleration m/s^2
  double b_max = 5.0;    // emergency deceleration clamp m/s^2
};

struct LeaderInfo {
  double gap = 0.0;    // bumper-to-bumper m
  double speed = 0.0;  // m/s
};

// Free-flow term only when no leader; emergency clamp at -b_max for a
// non-positive gap.
double idm_acceleration(double speed, const std::optional<LeaderInfo>& leader,
                        const IDMParams& p);

}  // namespace ecosim
