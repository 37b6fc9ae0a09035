#include "ecosim/dynamics.hpp"

#include <cmath>

namespace ecosim {

double idm_acceleration(double speed, const std::optional<LeaderInfo>& leader,
                        const IDMParams& p) {
  double free_term = 1.0 - std::pow(speed / p.v0, 4.0);
  if (!leader) return p.a_max * free_term;
  if (leader->gap <= 0.0) return -p.b_max;
  double dv = speed - leader->speed;
  double s_star = p.s0 + std::max(0.0, speed * p.T + speed * dv /
                                             (2.0 * std::sqrt(p.a_max * p.b)));
  double a = p.a_max * (free_term - (s_star / leader->gap) * (s_star / leader->gap));
  return std::max(a, -p.b_max);
}

}  // namespace ecosim
