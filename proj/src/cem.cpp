#include "safecontact/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "safecontact/rollout.hpp"

namespace safecontact {

namespace {

constexpr int kSearchDim = kActDim * kObsDim + kActDim;
constexpr std::uint64_t kCemEpisodeStream = 7;

PolicyParams params_from_theta(const Eigen::VectorXd& theta, double scale) {
  PolicyParams p{linear_policy_architecture(), Eigen::VectorXf::Zero(6 * kObsDim + 6), scale};
  // Weight matrix is 6 x 9 column-major; the mean head is rows 0..2.
  for (int j = 0; j < kObsDim; ++j)
    for (int i = 0; i < kActDim; ++i) p.params(j * 6 + i) = static_cast<float>(theta(j * kActDim + i));
  for (int i = 0; i < kActDim; ++i) p.params(6 * kObsDim + i) = static_cast<float>(theta(kActDim * kObsDim + i));
  return p;
}

}  // namespace

void CemConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("CemConfig: iterations must be >= 0");
  if (population < 1) throw std::invalid_argument("CemConfig: population must be >= 1");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0))
    throw std::invalid_argument("CemConfig: elite_fraction must lie in (0, 1]");
  if (!(init_std > 0.0) || !(min_std >= 0.0)) throw std::invalid_argument("CemConfig: bad standard deviations");
  if (episodes_per_candidate < 1) throw std::invalid_argument("CemConfig: episodes_per_candidate must be >= 1");
}

nn::Architecture linear_policy_architecture() { return nn::Architecture{{kObsDim, 2 * kActDim}, nn::Activation::kIdentity}; }

double mean_episode_return(const Policy& policy, const Env& env, const RewardWeights& weights,
                           const std::vector<std::uint64_t>& seeds, double contact_bonus) {
  RolloutSpec spec;
  spec.reward = weights;
  spec.contact_bonus = contact_bonus;
  double total = 0.0;
  for (std::uint64_t s : seeds) total += run_episode(policy, env, spec, s).episode_return;
  return total / static_cast<double>(seeds.size());
}

CemResult train_cem(const EnvConfig& env_cfg, const RewardWeights& weights, const CemConfig& cfg) {
  cfg.validate();
  const Env env(env_cfg);
  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(kSearchDim);
  Eigen::VectorXd sigma = Eigen::VectorXd::Constant(kSearchDim, cfg.init_std);
  const int n_elite = std::max(1, static_cast<int>(std::ceil(cfg.elite_fraction * cfg.population - 1e-12)));

  CemResult result;
  std::vector<Eigen::VectorXd> samples(cfg.population);
  std::vector<double> returns(cfg.population);
  std::vector<int> order(cfg.population);

  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < cfg.episodes_per_candidate; ++k) {
      seeds.push_back(derive_seed(derive_seed(cfg.seed, kCemEpisodeStream),
                                  static_cast<std::uint64_t>(it) * cfg.episodes_per_candidate + k));
    }
    for (int c = 0; c < cfg.population; ++c) {
      samples[c] = mu;
      for (int d = 0; d < kSearchDim; ++d) samples[c](d) += sigma(d) * normal(rng);
      const MlpPolicy policy(params_from_theta(samples[c], env_cfg.delta_max));
      returns[c] = mean_episode_return(policy, env, weights, seeds, cfg.contact_bonus);
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return returns[a] > returns[b]; });

    double elite_mean = 0.0;
    for (int e = 0; e < n_elite; ++e) elite_mean += returns[order[e]];
    result.elite_mean_return.push_back(elite_mean / n_elite);
    result.best_return.push_back(returns[order[0]]);

    if (n_elite < cfg.population) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(kSearchDim);
      for (int e = 0; e < n_elite; ++e) m += samples[order[e]];
      m /= n_elite;
      Eigen::VectorXd v = Eigen::VectorXd::Zero(kSearchDim);
      for (int e = 0; e < n_elite; ++e) v += (samples[order[e]] - m).array().square().matrix();
      v /= n_elite;
      mu = m;
      sigma = v.cwiseSqrt().cwiseMax(cfg.min_std);
    }
    result.mean_norm.push_back(mu.norm());
  }
  result.policy = params_from_theta(mu, env_cfg.delta_max);
  return result;
}

}  // namespace safecontact
