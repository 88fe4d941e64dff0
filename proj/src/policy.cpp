#include "safecontact/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "safecontact/sac.hpp"

namespace safecontact {

ActionMode parse_action_mode(const std::string& name) {
  if (name == "deterministic") return ActionMode::kDeterministic;
  if (name == "stochastic") return ActionMode::kStochastic;
  throw std::invalid_argument("unknown action mode '" + name + "' (expected deterministic|stochastic)");
}

std::string to_string(ActionMode mode) {
  return mode == ActionMode::kDeterministic ? "deterministic" : "stochastic";
}

MlpPolicy::MlpPolicy(const PolicyParams& params) : params_(params), net_(params.arch) {
  if (params.arch.input_dim() != kObsDim || params.arch.output_dim() != 2 * kActDim) {
    throw std::invalid_argument("MlpPolicy: architecture must map 9 observations to 6 head outputs");
  }
  if (static_cast<std::size_t>(params.params.size()) != params.arch.param_count()) {
    throw std::invalid_argument("MlpPolicy: parameter count does not match the architecture");
  }
  net_.params() = params.params;
}

namespace {

[[noreturn]] void throw_non_finite(const PolicyParams& p, const Observation& obs) {
  std::ostringstream msg;
  msg << "policy produced a non-finite output; params: count=" << p.params.size()
      << " finite=" << (p.params.allFinite() ? "yes" : "no") << " l2=" << p.params.norm()
      << " max|.|=" << (p.params.size() ? p.params.cwiseAbs().maxCoeff() : 0.0f) << "; first:";
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(4, p.params.size()); ++i) msg << ' ' << p.params(i);
  msg << "; obs:";
  for (int i = 0; i < kObsDim; ++i) msg << ' ' << obs(i);
  throw NumericError(msg.str());
}

}  // namespace

Vec3 squashed_action(const nn::Mlp<float>& net, const Observation& obs, ActionMode mode, Rng& rng,
                     const PolicyParams* snapshot) {
  nn::Mlp<float>::Cache cache;
  const Eigen::MatrixXf& head = net.forward(obs.cast<float>(), cache);
  if (!head.allFinite()) {
    throw_non_finite(snapshot ? *snapshot : PolicyParams{net.arch(), net.params(), 1.0}, obs);
  }
  Vec3 out;
  if (mode == ActionMode::kDeterministic) {
    for (int i = 0; i < kActDim; ++i) out(i) = std::tanh(static_cast<double>(head(i, 0)));
  } else {
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < kActDim; ++i) {
      const double log_std = std::clamp(static_cast<double>(head(kActDim + i, 0)), kLogStdMin, kLogStdMax);
      out(i) = std::tanh(static_cast<double>(head(i, 0)) + std::exp(log_std) * n(rng));
    }
  }
  return out;
}

Vec3 MlpPolicy::act(const Observation& obs, ActionMode mode, Rng& rng) const {
  return squashed_action(net_, obs, mode, rng, &params_) * params_.action_scale;
}

Vec3 OverspeedPolicy::act(const Observation& obs, ActionMode mode, Rng& rng) const {
  const Vec3 to_goal = obs.segment<3>(3) - obs.segment<3>(0);
  const double d = to_goal.norm();
  Vec3 cmd = d > 0.0 ? Vec3(to_goal / d * (2.0 * delta_max_)) : Vec3(0.0, 0.0, -2.0 * delta_max_);
  if (mode == ActionMode::kStochastic) {
    std::normal_distribution<double> n(0.0, noise_ * delta_max_);
    for (int i = 0; i < 3; ++i) cmd(i) += n(rng);
  }
  for (int i = 0; i < 3; ++i) cmd(i) = std::clamp(cmd(i), -delta_max_, delta_max_);
  return cmd;
}

Vec3 select_action(const PolicyParams& params, const Observation& obs, ActionMode mode, Rng& rng) {
  return MlpPolicy(params).act(obs, mode, rng);
}

PolicyParams policy_from_actor(const nn::Mlp<float>& actor, double action_scale) {
  return PolicyParams{actor.arch(), actor.params(), action_scale};
}

}  // namespace safecontact
