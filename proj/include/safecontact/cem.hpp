#pragma once

#include <cstdint>
#include <vector>

#include "safecontact/env.hpp"
#include "safecontact/policy.hpp"
#include "safecontact/reward.hpp"

namespace safecontact {

/// Cross-entropy search over a linear-plus-bias policy a = tanh(W s + b).
struct CemConfig {
  int iterations = 200;
  int population = 32;
  double elite_fraction = 0.2;
  double init_std = 10.0;
  double min_std = 0.05;
  int episodes_per_candidate = 3;
  std::uint64_t seed = 0;
  double contact_bonus = 500.0;

  void validate() const;
};

struct CemResult {
  PolicyParams policy;
  std::vector<double> elite_mean_return;  // per iteration
  std::vector<double> best_return;        // per iteration
  std::vector<double> mean_norm;          // ||mu|| per iteration
};

/// Searches the 30 mean-head parameters of a 9 -> 6 linear policy (the
/// log-std rows stay zero). With every candidate an elite the sample carries
/// no ranking information and the search distribution is left unchanged.
CemResult train_cem(const EnvConfig& env_cfg, const RewardWeights& weights, const CemConfig& cfg);

/// Average return of a policy over `seeds`, deterministic actions, no shield.
double mean_episode_return(const Policy& policy, const Env& env, const RewardWeights& weights,
                           const std::vector<std::uint64_t>& seeds, double contact_bonus);

nn::Architecture linear_policy_architecture();

}  // namespace safecontact
