#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "safecontact/nn.hpp"
#include "safecontact/replay_buffer.hpp"

namespace safecontact {

/// Off-policy entropy-regularized actor-critic settings.
struct AgentConfig {
  double gamma = 0.99;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  int batch_size = 256;
  double tau_polyak = 0.005;
  std::size_t buffer_capacity = 100000;
  int updates_per_step = 1;
  std::vector<int> hidden_layers{256, 256};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::int64_t total_env_steps = 150000;
  int learning_starts = 100;
  /// Fixed temperature when set; automatic tuning otherwise.
  std::optional<double> fixed_temperature;
  double init_temperature = 1.0;
  double target_entropy = -3.0;
  std::int64_t checkpoint_every = 0;

  void validate() const;
};

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;

enum class TargetMode { kMinOfTwin, kFirstCriticOnly };

namespace sac {

template <typename S>
using Mat = nn::Matrix<S>;
template <typename S>
using Vec = nn::Vector<S>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

/// Reparameterized draw from the tanh-squashed Gaussian head. Actions are
/// in the normalized [-1, 1] box.
template <typename S>
struct SquashedSample {
  Mat<S> action;      // 3 x B
  RowVec<S> log_prob; // 1 x B
  Mat<S> sigma;       // 3 x B
  Mat<S> eps;         // 3 x B
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> log_std_active;
};

template <typename S>
void squash_sample(const nn::Mlp<S>& actor, const Mat<S>& obs, const Mat<S>& eps,
                   typename nn::Mlp<S>::Cache& cache, SquashedSample<S>& out) {
  const Mat<S>& head = actor.forward(obs, cache);
  const Eigen::Index b = obs.cols();
  const auto mean = head.topRows(kActDim);
  const auto raw_log_std = head.bottomRows(kActDim);
  out.log_std_active = (raw_log_std.array() >= S(kLogStdMin)) && (raw_log_std.array() <= S(kLogStdMax));
  const Mat<S> log_std = raw_log_std.array().max(S(kLogStdMin)).min(S(kLogStdMax)).matrix();
  out.sigma = log_std.array().exp().matrix();
  out.eps = eps;
  const Mat<S> u = (mean.array() + out.sigma.array() * eps.array()).matrix();
  out.action = u.array().tanh().matrix();
  const S half_log_2pi = S(0.5 * std::log(2.0 * std::numbers::pi));
  out.log_prob.resize(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    S lp = 0;
    for (int i = 0; i < kActDim; ++i) {
      const S a = out.action(i, j);
      lp += -S(0.5) * eps(i, j) * eps(i, j) - log_std(i, j) - half_log_2pi;
      lp -= std::log(S(1) - a * a + S(kTanhEps));
    }
    out.log_prob(j) = lp;
  }
}

/// Critic input [obs; action].
template <typename S>
Mat<S> critic_input(const Mat<S>& obs, const Mat<S>& act) {
  Mat<S> x(obs.rows() + act.rows(), obs.cols());
  x << obs, act;
  return x;
}

/// 0.5 * mean((q - y)^2); gradient accumulated into `grad`.
template <typename S>
S critic_loss_grad(const nn::Mlp<S>& critic, const Mat<S>& obs_act, const RowVec<S>& target,
                   typename nn::Mlp<S>::Cache& cache, Vec<S>* grad) {
  const Mat<S>& q = critic.forward(obs_act, cache);
  const S inv_b = S(1) / S(obs_act.cols());
  const RowVec<S> diff = q.row(0) - target;
  const S loss = S(0.5) * diff.squaredNorm() * inv_b;
  if (grad != nullptr) {
    Mat<S> d_out = diff * inv_b;
    critic.backward(cache, d_out, grad, nullptr);
  }
  return loss;
}

/// r + gamma (1 - done) (Q_target(s', a') - alpha log pi(a'|s')).
template <typename S>
RowVec<S> bellman_targets(const nn::Mlp<S>& actor, const nn::Mlp<S>& q1_target, const nn::Mlp<S>& q2_target,
                          const Mat<S>& next_obs, const Mat<S>& eps, const RowVec<S>& rew,
                          const RowVec<S>& done, S alpha, S gamma, TargetMode mode) {
  typename nn::Mlp<S>::Cache ca, c1, c2;
  SquashedSample<S> next;
  squash_sample(actor, next_obs, eps, ca, next);
  const Mat<S> x = critic_input<S>(next_obs, next.action);
  RowVec<S> q = q1_target.forward(x, c1).row(0);
  if (mode == TargetMode::kMinOfTwin) q = q.cwiseMin(q2_target.forward(x, c2).row(0));
  const RowVec<S> soft_v = q - alpha * next.log_prob;
  return (rew.array() + gamma * (S(1) - done.array()) * soft_v.array()).matrix();
}

/// mean(alpha log pi - min(Q1, Q2)) at reparameterized actions; the
/// gradient with respect to actor parameters is accumulated into `grad`.
template <typename S>
S actor_loss_grad(const nn::Mlp<S>& actor, const nn::Mlp<S>& q1, const nn::Mlp<S>& q2, const Mat<S>& obs,
                  const Mat<S>& eps, S alpha, Vec<S>* grad, RowVec<S>* log_prob_out = nullptr) {
  typename nn::Mlp<S>::Cache ca, c1, c2;
  SquashedSample<S> smp;
  squash_sample(actor, obs, eps, ca, smp);
  const Mat<S> x = critic_input<S>(obs, smp.action);
  const RowVec<S> qa = q1.forward(x, c1).row(0);
  const RowVec<S> qb = q2.forward(x, c2).row(0);
  const Eigen::Index b = obs.cols();
  const S inv_b = S(1) / S(b);
  S loss = 0;
  Mat<S> d1 = Mat<S>::Zero(1, b), d2 = Mat<S>::Zero(1, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const bool first = qa(j) <= qb(j);
    loss += alpha * smp.log_prob(j) - (first ? qa(j) : qb(j));
    (first ? d1 : d2)(0, j) = -inv_b;
  }
  loss *= inv_b;
  if (log_prob_out != nullptr) *log_prob_out = smp.log_prob;
  if (grad == nullptr) return loss;

  Mat<S> dx1, dx2;
  q1.backward(c1, d1, nullptr, &dx1);
  q2.backward(c2, d2, nullptr, &dx2);
  const Mat<S> dq_da = dx1.bottomRows(kActDim) + dx2.bottomRows(kActDim);

  Mat<S> d_head(2 * kActDim, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (int i = 0; i < kActDim; ++i) {
      const S a = smp.action(i, j);
      const S one_m_a2 = S(1) - a * a;
      // d(-log(1 - tanh(u)^2 + eps))/du
      const S dcorr_du = S(2) * a * one_m_a2 / (one_m_a2 + S(kTanhEps));
      const S du = dq_da(i, j) * one_m_a2 + alpha * inv_b * dcorr_du;
      d_head(i, j) = du;
      const S dls = du * smp.sigma(i, j) * smp.eps(i, j) - alpha * inv_b;
      d_head(kActDim + i, j) = smp.log_std_active(i, j) ? dls : S(0);
    }
  }
  actor.backward(ca, d_head, grad, nullptr);
  return loss;
}

template <typename S>
void polyak_update(const nn::Mlp<S>& online, nn::Mlp<S>& target, double tau) {
  if (tau == 1.0) {
    target.params() = online.params();
  } else if (tau != 0.0) {
    target.params() = S(1.0 - tau) * target.params() + S(tau) * online.params();
  }
}

}  // namespace sac

struct SacLosses {
  double critic = 0.0;
  double actor = 0.0;
  double temperature_loss = 0.0;
  double temperature = 0.0;
};

/// Twin-critic learner state in single precision.
class SacLearner {
 public:
  SacLearner(const AgentConfig& cfg, Rng& init_rng);

  /// One critic, actor and temperature update plus Polyak averaging.
  /// Throws std::logic_error on an empty or undersized buffer and
  /// std::runtime_error when a loss goes non-finite.
  SacLosses update(const ReplayBuffer& buffer, Rng& rng);

  const nn::Mlp<float>& actor() const { return actor_; }
  const nn::Mlp<float>& critic(int i) const { return i == 0 ? q1_ : q2_; }
  const nn::Mlp<float>& target_critic(int i) const { return i == 0 ? q1_target_ : q2_target_; }
  nn::Mlp<float>& mutable_critic(int i) { return i == 0 ? q1_ : q2_; }
  double temperature() const;

 private:
  AgentConfig cfg_;
  nn::Mlp<float> actor_;
  nn::Mlp<float> q1_, q2_, q1_target_, q2_target_;
  nn::Adam<float> actor_opt_, q1_opt_, q2_opt_;
  nn::Adam<double> temp_opt_;
  nn::Vector<double> log_temperature_;
  Batch batch_;
  nn::Mlp<float>::Cache cache_;
};

nn::Architecture actor_architecture(const std::vector<int>& hidden);
nn::Architecture critic_architecture(const std::vector<int>& hidden);

}  // namespace safecontact
