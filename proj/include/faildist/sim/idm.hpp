#pragma once

namespace faildist::sim {

struct IdmParams {
  double v_desired = 29.0;  // m/s
  double s_min = 5.0;       // m
  double a_max = 3.0;       // m/s^2
  double b_comf = 2.0;      // m/s^2, magnitude
  double t_headway = 1.5;   // s
  double delta = 4.0;

  double b_hard() const { return 2.0 * b_comf; }
  void validate() const;
};

/// Intelligent driver model acceleration, clamped to [-2 b_comf, a_max].
/// Pass gap = +infinity when there is no leader (v_lead is then ignored).
/// Throws ContractViolation for a finite gap <= 0.
double idm_acceleration(double gap, double v, double v_lead, const IdmParams& params);

}  // namespace faildist::sim
