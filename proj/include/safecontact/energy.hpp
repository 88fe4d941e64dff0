#pragma once

#include <cmath>

namespace safecontact {

/// Speed at which a point mass carries exactly `energy_budget` joules.
inline double energy_speed_limit(double mass, double energy_budget) {
  return std::sqrt(2.0 * energy_budget / mass);
}

/// Impact gain k_v mapping normal approach speed to contact force so that
/// the energy-limited speed produces exactly `force_limit`. Rounded down
/// when needed so that k_v * v_max never exceeds the limit in floating point.
inline double calibrated_impact_gain(double force_limit, double mass, double energy_budget) {
  const double v_max = energy_speed_limit(mass, energy_budget);
  double k = force_limit / v_max;
  while (k * v_max > force_limit) k = std::nextafter(k, 0.0);
  return k;
}

}  // namespace safecontact
