#include "safecontact/env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace safecontact {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("EnvConfig: " + what);
}

}  // namespace

void EnvConfig::validate() const {
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(delta_max) && delta_max > 0.0, "delta_max must be > 0");
  require(std::isfinite(grasp_tol) && grasp_tol > 0.0, "grasp_tol must be > 0");
  require(horizon >= 1, "horizon must be >= 1");
  require(std::isfinite(force_limit) && force_limit > 0.0, "F_tau must be > 0");
  require(std::isfinite(impact_gain) && impact_gain > 0.0, "k_v must be > 0");
  static constexpr const char* kAxis[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) {
    require(std::isfinite(workspace[i].min) && std::isfinite(workspace[i].max) &&
                workspace[i].min < workspace[i].max,
            std::string("workspace ") + kAxis[i] + " needs min < max");
  }
  require(home.allFinite(), "home must be finite");
  require(std::abs(hand_normal.norm() - 1.0) <= 1e-9, "hand_normal must be unit length");
}

Observation EnvState::observation() const {
  Observation obs;
  obs << ee_pos, hand_pos, ee_vel;
  return obs;
}

double distance_to_goal(const EnvState& state) { return (state.ee_pos - state.hand_pos).norm(); }

Env::Env(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

EnvState Env::reset(std::uint64_t seed) const {
  Rng rng(seed);
  EnvState s;
  s.ee_pos = config_.home;
  for (int i = 0; i < 3; ++i) {
    std::uniform_real_distribution<double> axis(config_.workspace[i].min, config_.workspace[i].max);
    s.hand_pos[i] = axis(rng);
  }
  s.ee_vel.setZero();
  s.step_index = 0;
  return s;
}

Vec3 Env::clamp_displacement(const Vec3& delta) const {
  const double n = delta.norm();
  if (n <= config_.delta_max) return delta;
  Vec3 out = delta * (config_.delta_max / n);
  while (out.norm() > config_.delta_max) out *= 1.0 - 1e-16;
  return out;
}

StepResult Env::step(const EnvState& state, const Vec3& delta) const {
  if (!delta.allFinite()) {
    throw std::invalid_argument("Env::step: non-finite action (" + std::to_string(delta.x()) + ", " +
                                std::to_string(delta.y()) + ", " + std::to_string(delta.z()) + ")");
  }
  if (state.step_index >= config_.horizon) {
    throw std::logic_error("Env::step: episode already reached the horizon");
  }
  StepResult r;
  r.executed_delta = clamp_displacement(delta);
  r.state.hand_pos = state.hand_pos;
  r.state.ee_pos = state.ee_pos + r.executed_delta;
  r.state.ee_vel = r.executed_delta / config_.dt;
  r.state.step_index = state.step_index + 1;

  r.done = distance_to_goal(r.state) <= config_.grasp_tol;
  r.truncated = !r.done && r.state.step_index >= config_.horizon;
  if (r.done) {
    ContactEvent c = contact_force(r.state.ee_vel, config_.hand_normal);
    c.step_index = r.state.step_index;
    r.contact = c;
  }
  return r;
}

ContactEvent Env::contact_force(const Vec3& v_approach, const Vec3& hand_normal) const {
  if (std::abs(hand_normal.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("contact_force: hand normal must be unit length, got norm " +
                                std::to_string(hand_normal.norm()));
  }
  ContactEvent c;
  c.occurred = true;
  c.normal_speed = std::max(0.0, -v_approach.dot(hand_normal));
  c.normal_force = config_.impact_gain * c.normal_speed;
  c.violation = c.normal_force > config_.force_limit;
  return c;
}

}  // namespace safecontact
