#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "safecontact/energy.hpp"
#include "safecontact/types.hpp"

namespace safecontact {

struct AxisRange {
  double min;
  double max;
};

/// Reach-to-contact environment parameters. Masses and friction
/// coefficients are carried for completeness; the kinematic force law
/// does not read them.
struct EnvConfig {
  double dt = 1.0 / 60.0;
  double delta_max = 0.02;
  double grasp_tol = 0.01;
  int horizon = 150;
  double hand_mass = 0.5;
  double object_mass = 0.002;
  double mu_hand = 1.0;
  double mu_object = 0.5;
  double force_limit = 50.0;
  double impact_gain = calibrated_impact_gain(50.0, 0.93, 0.30);
  std::array<AxisRange, 3> workspace{{{-0.25, 0.25}, {-0.30, -0.15}, {0.15, 0.40}}};
  Vec3 home{0.0, 0.0, 0.45};
  Vec3 hand_normal{0.0, 0.0, 1.0};

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

struct EnvState {
  Vec3 ee_pos = Vec3::Zero();
  Vec3 hand_pos = Vec3::Zero();
  Vec3 ee_vel = Vec3::Zero();
  int step_index = 0;

  /// [ee_pos, hand_pos, ee_vel]
  Observation observation() const;

  bool operator==(const EnvState&) const = default;
};

struct ContactEvent {
  bool occurred = false;
  double normal_speed = 0.0;
  double normal_force = 0.0;
  bool violation = false;
  int step_index = 0;
};

struct StepResult {
  EnvState state;
  std::optional<ContactEvent> contact;
  bool done = false;
  bool truncated = false;
  Vec3 executed_delta = Vec3::Zero();
};

double distance_to_goal(const EnvState& state);

class Env {
 public:
  explicit Env(EnvConfig config);

  const EnvConfig& config() const { return config_; }

  /// End-effector at the home pose, hand sampled uniformly in the workspace.
  EnvState reset(std::uint64_t seed) const;

  /// Kinematic step: the displacement is clamped to norm <= delta_max and
  /// the resulting velocity is delta / dt. Throws on non-finite input or
  /// when the episode horizon has already been reached.
  StepResult step(const EnvState& state, const Vec3& delta) const;

  /// Impact model F_N = k_v * max(0, -v . n).
  ContactEvent contact_force(const Vec3& v_approach, const Vec3& hand_normal) const;

  Vec3 clamp_displacement(const Vec3& delta) const;

 private:
  EnvConfig config_;
};

}  // namespace safecontact
