#include "safecontact/shield.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "safecontact/energy.hpp"

namespace safecontact {

ShieldProfile parse_shield_profile(std::string_view name) {
  if (name == "sim") return ShieldProfile::kSim;
  if (name == "hardware") return ShieldProfile::kHardware;
  throw std::invalid_argument("unknown shield profile '" + std::string(name) + "' (expected sim|hardware)");
}

std::string_view to_string(ShieldProfile p) { return p == ShieldProfile::kSim ? "sim" : "hardware"; }

double ShieldConfig::lpf_coefficient() const { return std::exp(-2.0 * std::numbers::pi * cutoff_hz * dt); }

double ShieldConfig::speed_limit() const { return energy_speed_limit(mass, energy_budget); }

void ShieldConfig::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("ShieldConfig: m must be > 0");
  if (!(energy_budget > 0.0) || !std::isfinite(energy_budget))
    throw std::invalid_argument("ShieldConfig: E_max must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("ShieldConfig: dt must be > 0");
  if (!(barrier_gain > 0.0)) throw std::invalid_argument("ShieldConfig: alpha_h must be > 0");
  const double a = lpf_coefficient();
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("ShieldConfig: LPF coefficient must lie in (0, 1), got " + std::to_string(a));
}

void ClfConfig::validate() const {
  if (!(decay_rate > 0.0)) throw std::invalid_argument("ClfConfig: lambda must be > 0");
  if (!(slack_weight > 0.0)) throw std::invalid_argument("ClfConfig: rho must be > 0");
}

LpfOutput lpf_step(const LpfState& state, const Vec3& v_raw, double alpha) {
  const Vec3 v_f = alpha * state.v_f + (1.0 - alpha) * v_raw;
  return {LpfState{v_f}, v_f};
}

LpfOutput lpf_step(const LpfState& state, const Vec3& v_raw, const ShieldConfig& cfg) {
  return lpf_step(state, v_raw, cfg.lpf_coefficient());
}

double h_value(const Vec3& v, const ShieldConfig& cfg) {
  return cfg.energy_budget - 0.5 * cfg.mass * v.squaredNorm();
}

bool nagumo_ok(const Vec3& v, const Vec3& u, const ShieldConfig& cfg) {
  return -cfg.mass * v.dot(u) + cfg.barrier_gain * h_value(v, cfg) >= 0.0;
}

Vec3 ke_project(const Vec3& v_cmd, const ShieldConfig& cfg) {
  const double v_max = cfg.speed_limit();
  const double n = v_cmd.norm();
  if (n <= v_max) return v_cmd;
  Vec3 out = v_cmd * (v_max / n);
  // Rounding in the scale can land one ulp outside the ball.
  while (out.norm() > v_max) out *= 1.0 - std::numeric_limits<double>::epsilon();
  return out;
}

ShieldStep shield_pipeline(const LpfState& lpf, const Vec3& v_raw, const ShieldConfig& cfg) {
  const LpfOutput filtered = lpf_step(lpf, v_raw, cfg);
  ShieldStep out;
  out.state = filtered.state;
  out.v_filtered = filtered.v_f;
  out.v_safe = ke_project(filtered.v_f, cfg);
  out.intervened = out.v_safe != filtered.v_f;
  return out;
}

namespace {

// a.z <= b, z = (u, s)
struct Halfspace {
  Eigen::Vector4d a;
  double b;
};

}  // namespace

QpSolution shield_qp(const Vec3& v, const Vec3& u_cmd, const Vec3& ee_pos, const Vec3& hand_pos,
                     const ShieldConfig& cfg, const ClfConfig& clf) {
  clf.validate();
  const Vec3 g = ee_pos - hand_pos;
  const double lyap = 0.5 * g.squaredNorm();

  std::array<Halfspace, 3> cons;
  cons[0].a << cfg.mass * v, 0.0;
  cons[0].b = cfg.barrier_gain * h_value(v, cfg);
  cons[1].a << g, -1.0;
  cons[1].b = -clf.decay_rate * lyap;
  cons[2].a << 0.0, 0.0, 0.0, -1.0;
  cons[2].b = 0.0;

  // Objective z'Hz/2 + c'z with H = diag(2, 2, 2, 2 rho), c = (-2 u_cmd, 0).
  const Eigen::Vector4d hdiag(2.0, 2.0, 2.0, 2.0 * clf.slack_weight);
  Eigen::Vector4d c;
  c << -2.0 * u_cmd, 0.0;

  constexpr double kTol = 1e-9;
  const double scale = 1.0 + u_cmd.norm() + std::abs(cons[0].b) + std::abs(cons[1].b);

  bool found = false;
  Eigen::Vector4d best = Eigen::Vector4d::Zero();
  for (int mask = 0; mask < 8 && !found; ++mask) {
    std::array<int, 3> active{};
    int k = 0;
    bool degenerate = false;
    for (int i = 0; i < 3; ++i) {
      if (mask & (1 << i)) {
        if (cons[i].a.norm() == 0.0) degenerate = true;
        active[k++] = i;
      }
    }
    if (degenerate) continue;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(4 + k, 4 + k);
    Eigen::VectorXd rhs(4 + k);
    kkt.topLeftCorner<4, 4>() = hdiag.asDiagonal();
    rhs.head<4>() = -c;
    for (int j = 0; j < k; ++j) {
      kkt.block(0, 4 + j, 4, 1) = cons[active[j]].a;
      kkt.block(4 + j, 0, 1, 4) = cons[active[j]].a.transpose();
      rhs(4 + j) = cons[active[j]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::Vector4d z = sol.head<4>();

    bool ok = true;
    for (int j = 0; j < k; ++j) ok = ok && sol(4 + j) >= -kTol * scale;
    for (int i = 0; i < 3; ++i) ok = ok && cons[i].a.dot(z) <= cons[i].b + kTol * scale;
    if (ok) {
      best = z;
      found = true;
    }
  }
  if (!found) throw std::runtime_error("shield_qp: no KKT point found (degenerate constraint set)");

  QpSolution out{best.head<3>(), std::max(0.0, best(3))};
  const double residual = cons[0].a.head<3>().dot(out.u) - cons[0].b;
  if (residual > kTol) {
    // Pull back along the barrier normal to absorb solver rounding.
    const Vec3 n = cons[0].a.head<3>();
    out.u -= ((residual + 0.5 * kTol) / n.squaredNorm()) * n;
  }
  if (cons[0].a.head<3>().dot(out.u) - cons[0].b > kTol) {
    throw std::runtime_error("shield_qp: barrier constraint residual above tolerance");
  }
  return out;
}

}  // namespace safecontact
