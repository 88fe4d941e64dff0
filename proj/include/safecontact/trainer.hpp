#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safecontact/env.hpp"
#include "safecontact/policy.hpp"
#include "safecontact/reward.hpp"
#include "safecontact/sac.hpp"

namespace safecontact {

struct CurveRow {
  std::uint64_t seed = 0;
  int episode = 0;
  std::int64_t steps = 0;  // cumulative env steps at episode end
  double episode_return = 0.0;
  int length = 0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  PolicyParams policy;
  std::vector<CurveRow> curve;
  bool diverged = false;
  std::string error;
  /// Mean return over the last `kFinalWindow` episodes.
  double final_return = 0.0;
};

struct TrainResult {
  std::vector<SeedRun> runs;
  double return_mean = 0.0;  // across non-diverged seeds
  double return_std = 0.0;   // population std across non-diverged seeds
};

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  int workers = 1;
  double contact_bonus = 500.0;
  std::function<void(const std::string&)> log;
};

inline constexpr int kFinalWindow = 20;

/// Stream tags: network init, action sampling and minibatch sampling share
/// the learner stream; episode resets use their own stream.
inline constexpr std::uint64_t kLearnerStream = 1;
inline constexpr std::uint64_t kEpisodeStream = 2;

std::uint64_t training_episode_seed(std::uint64_t seed, int episode);

/// One unshielded training run. A non-finite loss stops the run and sets
/// `diverged`; the last finite policy is kept.
SeedRun train_seed(const EnvConfig& env_cfg, const RewardWeights& weights, const AgentConfig& cfg,
                   std::uint64_t seed, const TrainOptions& opts = {});

/// Runs every seed in cfg.seeds, optionally in parallel.
TrainResult train(const EnvConfig& env_cfg, const RewardWeights& weights, const AgentConfig& cfg,
                  const TrainOptions& opts = {});

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t seed);

std::string curves_to_csv(const std::vector<SeedRun>& runs);

}  // namespace safecontact
