#pragma once

#include <stdexcept>
#include <string>

#include "safecontact/nn.hpp"
#include "safecontact/types.hpp"

namespace safecontact {

enum class ActionMode { kDeterministic, kStochastic };

ActionMode parse_action_mode(const std::string& name);
std::string to_string(ActionMode mode);

/// Flat actor parameters plus the architecture they belong to. The head
/// emits mean and log-std of a tanh-squashed Gaussian; actions are scaled
/// by `action_scale` (the per-axis displacement bound).
struct PolicyParams {
  nn::Architecture arch;
  Eigen::VectorXf params;
  double action_scale = 0.02;

  bool operator==(const PolicyParams& o) const {
    return arch == o.arch && action_scale == o.action_scale && params.size() == o.params.size() &&
           params == o.params;
  }
};

/// Raised when the network produces NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Cartesian displacement for one control step.
  virtual Vec3 act(const Observation& obs, ActionMode mode, Rng& rng) const = 0;
};

class MlpPolicy final : public Policy {
 public:
  explicit MlpPolicy(const PolicyParams& params);
  Vec3 act(const Observation& obs, ActionMode mode, Rng& rng) const override;
  const PolicyParams& params() const { return params_; }

 private:
  PolicyParams params_;
  nn::Mlp<float> net_;
};

/// Always commands zero displacement.
class ZeroPolicy final : public Policy {
 public:
  Vec3 act(const Observation&, ActionMode, Rng&) const override { return Vec3::Zero(); }
};

/// Drives toward the hand with per-axis commands saturated at the
/// displacement bound, so the requested speed exceeds delta_max / dt on most
/// steps. Stochastic mode adds Gaussian noise of `noise` * delta_max per axis.
class OverspeedPolicy final : public Policy {
 public:
  explicit OverspeedPolicy(double delta_max, double noise = 0.5) : delta_max_(delta_max), noise_(noise) {}
  Vec3 act(const Observation& obs, ActionMode mode, Rng& rng) const override;

 private:
  double delta_max_;
  double noise_;
};

/// Action in the normalized [-1, 1] box. `snapshot` (optional) is echoed in
/// the diagnostic when the network output is non-finite.
Vec3 squashed_action(const nn::Mlp<float>& net, const Observation& obs, ActionMode mode, Rng& rng,
                     const PolicyParams* snapshot = nullptr);

Vec3 select_action(const PolicyParams& params, const Observation& obs, ActionMode mode, Rng& rng);

PolicyParams policy_from_actor(const nn::Mlp<float>& actor, double action_scale);

}  // namespace safecontact
