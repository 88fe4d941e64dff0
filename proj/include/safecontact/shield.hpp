#pragma once

#include <string_view>

#include "safecontact/types.hpp"

namespace safecontact {

/// `kSim` filters at the simulator step, `kHardware` at the 4 ms robot
/// control period.
enum class ShieldProfile { kSim, kHardware };

inline constexpr double kHardwareControlPeriod = 0.004;

ShieldProfile parse_shield_profile(std::string_view name);
std::string_view to_string(ShieldProfile p);

/// Kinetic-energy shield parameters. The LPF coefficient and the speed
/// limit are derived, never stored.
struct ShieldConfig {
  double mass = 0.93;           // kg, effective end-effector mass
  double energy_budget = 0.30;  // J
  double cutoff_hz = 25.0;
  double dt = 1.0 / 60.0;       // s, period the filter runs at
  double barrier_gain = 1.0;    // 1/s, class-K gain on h in the Nagumo condition

  /// alpha = exp(-2 pi f_c dt)
  double lpf_coefficient() const;
  /// v_max = sqrt(2 E_max / m)
  double speed_limit() const;
  void validate() const;
};

/// Goal-tracking Lyapunov term for the optional QP filter.
struct ClfConfig {
  double decay_rate = 1.0;     // lambda, 1/s
  double slack_weight = 100.0; // rho
  void validate() const;
};

struct LpfState {
  Vec3 v_f = Vec3::Zero();
  /// Filter state primed with the first command.
  static LpfState primed(const Vec3& v) { return {v}; }
};

struct LpfOutput {
  LpfState state;
  Vec3 v_f;
};

LpfOutput lpf_step(const LpfState& state, const Vec3& v_raw, double alpha);
LpfOutput lpf_step(const LpfState& state, const Vec3& v_raw, const ShieldConfig& cfg);

/// Barrier value h(v) = E_max - m ||v||^2 / 2.
double h_value(const Vec3& v, const ShieldConfig& cfg);

/// Forward-invariance check -m v.u + alpha_h h(v) >= 0.
bool nagumo_ok(const Vec3& v, const Vec3& u, const ShieldConfig& cfg);

/// Radial projection onto the ball ||v|| <= v_max. The returned vector
/// never has a computed norm above v_max.
Vec3 ke_project(const Vec3& v_cmd, const ShieldConfig& cfg);

struct ShieldStep {
  LpfState state;
  Vec3 v_filtered;
  Vec3 v_safe;
  bool intervened = false;
};

/// LPF followed by the kinetic-energy projection.
ShieldStep shield_pipeline(const LpfState& lpf, const Vec3& v_raw, const ShieldConfig& cfg);

struct QpSolution {
  Vec3 u;
  double slack = 0.0;
};

/// Minimizes ||u - u_cmd||^2 + rho s^2 subject to the hard energy barrier
/// (m v).u <= alpha_h h(v) and the softened CLF decrease
/// (p_r - p_h).u - s <= -lambda V, s >= 0, with V = ||p_r - p_h||^2 / 2.
/// Solved exactly by active-set enumeration over the three inequalities.
QpSolution shield_qp(const Vec3& v, const Vec3& u_cmd, const Vec3& ee_pos, const Vec3& hand_pos,
                     const ShieldConfig& cfg, const ClfConfig& clf);

}  // namespace safecontact
