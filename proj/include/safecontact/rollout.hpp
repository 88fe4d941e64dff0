#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "safecontact/env.hpp"
#include "safecontact/policy.hpp"
#include "safecontact/reward.hpp"
#include "safecontact/shield.hpp"

namespace safecontact {

/// Per-step logs of one episode plus its terminal contact record. Commands
/// are velocities in m/s (displacement / dt).
struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::vector<double> distance;
  std::vector<double> kinetic_energy;
  std::vector<double> speed;
  std::vector<Vec3> command_raw;
  std::vector<Vec3> command_filtered;
  std::vector<Vec3> command_safe;
  std::vector<Vec3> velocity;  // executed end-effector velocity after each step
  std::vector<std::uint8_t> intervened;

  double ke_contact = 0.0;  // KE logged on the step before termination
  double f_contact = 0.0;
  bool success = false;
  bool violation = false;
  int steps = 0;
  double episode_return = 0.0;
  double wall_time_s = 0.0;  // informational, never serialized
};

struct RolloutSpec {
  ShieldConfig shield;  // mass and budget are also used for KE logging
  bool shield_enabled = false;
  ActionMode mode = ActionMode::kDeterministic;
  std::optional<RewardWeights> reward;
  double contact_bonus = 500.0;
  /// When set, the projected command also passes through the CBF+CLF QP
  /// and is projected once more onto the energy ball.
  std::optional<ClfConfig> qp;
};

/// Stream tag for the per-episode action-sampling generator.
inline constexpr std::uint64_t kPolicyStream = 0x5eed;

/// One episode: policy -> LPF -> kinetic-energy projection -> env step,
/// logging distance, KE and speed. With the shield disabled the raw
/// command is executed and the LPF is bypassed.
EpisodeTrace run_episode(const Policy& policy, const Env& env, const RolloutSpec& spec, std::uint64_t seed);

struct BatchOptions {
  std::optional<std::filesystem::path> trace_dir;  // one CSV per finished episode
  int workers = 1;
  /// Consulted before each episode starts; returning false stops the batch.
  std::function<bool(std::size_t finished)> keep_going;
};

/// Episodes for seeds seed0 .. seed0 + n - 1, returned in seed order.
/// Stops early (returning the finished prefix) when `keep_going` says so.
std::vector<EpisodeTrace> batch_rollout(const Policy& policy, const EnvConfig& env_cfg, const RolloutSpec& spec,
                                        std::size_t n_episodes, std::uint64_t seed0, const BatchOptions& opts = {});

std::filesystem::path trace_file_name(const std::filesystem::path& dir, std::uint64_t seed);

/// Converts a safe velocity command into a displacement whose executed
/// speed (delta / dt) stays inside the projection ball in floating point.
Vec3 displacement_within_limit(const Vec3& v_safe, double dt, double v_max);

}  // namespace safecontact
