#include "safecontact/reward.hpp"

#include <stdexcept>

namespace safecontact {

RewardWeights reward_preset(std::string_view name) {
  if (name == "RF1") return {1.0, 0.0, 0.0, 0.0};
  if (name == "RF2") return {1.0, 1.0, 0.0, 0.0};
  if (name == "RF3") return {1.0, 2.0, 0.0, 0.0};
  if (name == "RF4") return {1.0, 2.0, 1.0, 0.0};
  if (name == "RF5") return {1.0, 2.0, 1.0, 1.0};
  throw std::invalid_argument("unknown reward preset '" + std::string(name) + "' (expected RF1..RF5)");
}

double reach_reward(const RewardContext& ctx) {
  if (ctx.contact) return ctx.contact_bonus;
  return -(ctx.ee_pos - ctx.hand_pos).norm();
}

double safety_reward(const RewardContext& ctx) {
  if (ctx.normal_force < 0.0) throw std::invalid_argument("safety_reward: negative contact force");
  if (!ctx.contact) return 0.0;
  const double f = ctx.normal_force;
  const double tau = ctx.force_limit;
  if (f <= tau) return tau * (1.0 - f / tau);
  return -tau * ((f - tau) / tau);
}

double jerk_reward(const RewardContext& ctx) { return -(ctx.delta - ctx.delta_prev).norm(); }

double proximity_reward(const RewardContext& ctx) {
  const double hand_norm = ctx.hand_pos.norm();
  if (!(hand_norm > 0.0)) throw std::invalid_argument("proximity_reward: hand position at the origin");
  return ((ctx.ee_pos - ctx.hand_pos).norm() / hand_norm) * ctx.delta.norm();
}

double total_reward(const RewardContext& ctx, const RewardWeights& w) {
  // Zero-weight terms are skipped so their preconditions do not apply.
  double r = 0.0;
  if (w.reach != 0.0) r += w.reach * reach_reward(ctx);
  if (w.safety != 0.0) r += w.safety * safety_reward(ctx);
  if (w.jerk != 0.0) r += w.jerk * jerk_reward(ctx);
  if (w.proximity != 0.0) r += w.proximity * proximity_reward(ctx);
  return r;
}

}  // namespace safecontact
