#pragma once

#include <string>
#include <string_view>

#include "safecontact/types.hpp"

namespace safecontact {

/// Weights for reach, safety, jerk and proximity terms.
struct RewardWeights {
  double reach = 1.0;
  double safety = 0.0;
  double jerk = 0.0;
  double proximity = 0.0;

  bool operator==(const RewardWeights&) const = default;
};

/// Named presets RF1..RF5. Throws std::invalid_argument for unknown names.
RewardWeights reward_preset(std::string_view name);

struct RewardContext {
  Vec3 ee_pos = Vec3::Zero();
  Vec3 hand_pos = Vec3::Zero();
  bool contact = false;
  double normal_force = 0.0;
  double force_limit = 50.0;
  Vec3 delta = Vec3::Zero();
  Vec3 delta_prev = Vec3::Zero();
  double contact_bonus = 500.0;
};

/// Contact bonus on contact, negative distance otherwise.
double reach_reward(const RewardContext& ctx);

/// Zero without contact, F_tau - F_N for gentle contact and -(F_N - F_tau)
/// past the threshold. Rejects negative forces.
double safety_reward(const RewardContext& ctx);

/// Penalty -||delta - delta_prev||.
double jerk_reward(const RewardContext& ctx);

/// (||p_r - p_h|| / ||p_h||) * ||delta||. Rejects a hand at the origin.
double proximity_reward(const RewardContext& ctx);

double total_reward(const RewardContext& ctx, const RewardWeights& w);

}  // namespace safecontact
