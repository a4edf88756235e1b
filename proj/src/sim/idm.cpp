#include "faildist/sim/idm.hpp"

#include <algorithm>
#include <cmath>

#include "faildist/core/errors.hpp"

namespace faildist::sim {

void IdmParams::validate() const {
  if (!(v_desired > 0 && s_min > 0 && a_max > 0 && b_comf > 0 && t_headway > 0 && delta > 0)) {
    throw ConfigError("IDM parameters must all be strictly positive");
  }
}

double idm_acceleration(double gap, double v, double v_lead, const IdmParams& p) {
  const double free_term = std::pow(v / p.v_desired, p.delta);
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    if (gap <= 0.0) throw ContractViolation("idm_acceleration: non-positive gap to leader");
    // The dynamic part is floored at 0 so a much faster leader never
    // produces a desired gap below s_min.
    const double dynamic =
        v * p.t_headway + v * (v - v_lead) / (2.0 * std::sqrt(p.a_max * p.b_comf));
    const double s_star = p.s_min + std::max(0.0, dynamic);
    interaction = (s_star / gap) * (s_star / gap);
  }
  const double a = p.a_max * (1.0 - free_term - interaction);
  return std::clamp(a, -p.b_hard(), p.a_max);
}

}  // namespace faildist::sim
