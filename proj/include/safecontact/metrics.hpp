#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "safecontact/rollout.hpp"

namespace safecontact {

/// Episode-batch summary. Statistics over an empty subset (no successes,
/// no contacts) are NaN. Standard deviations are population (ddof = 0).
struct Metrics {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  std::size_t contacts = 0;
  double success_rate = 0.0;  // percent
  double T_mean = 0.0;        // s, successful episodes only
  double T_std = 0.0;
  double F_mean = 0.0;        // N, episodes with contact
  double F_std = 0.0;
  double F_max = 0.0;
  double F_median = 0.0;
  std::size_t violations = 0;
  double sv_rate = 0.0;      // percent of contact episodes
  double sv_rate_all = 0.0;  // percent of all episodes
  double rms_jerk_mean = 0.0;
  double rms_jerk_std = 0.0;
  std::size_t jerk_episodes = 0;
  double return_mean = 0.0;
  double return_std = 0.0;
};

/// RMS of the second difference of a velocity series divided by dt^2:
/// a[t] = (v[t] - v[t-1]) / dt, j[t] = ||a[t] - a[t-1]|| / dt.
/// Requires at least three samples.
double rms_jerk(std::span<const Vec3> velocity, double dt);

/// Executed velocity series of an episode, starting from rest at reset.
std::vector<Vec3> velocity_series(const EpisodeTrace& trace);

/// Throws std::invalid_argument on an empty list.
Metrics compute_metrics(std::span<const EpisodeTrace> traces, double dt);

}  // namespace safecontact
