#include "safecontact/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "safecontact/policy_io.hpp"
#include "safecontact/trace_io.hpp"

namespace safecontact {

namespace {

// Keeps the per-update temporaries on the heap instead of fresh mmap pages.
void tune_allocator() {
#if defined(__GLIBC__)
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    return true;
  }();
  (void)done;
#endif
}

}  // namespace

std::uint64_t training_episode_seed(std::uint64_t seed, int episode) {
  return derive_seed(derive_seed(seed, kEpisodeStream), static_cast<std::uint64_t>(episode));
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t seed) {
  return dir / ("seed_" + std::to_string(seed) + ".ckpt");
}

SeedRun train_seed(const EnvConfig& env_cfg, const RewardWeights& weights, const AgentConfig& cfg,
                   std::uint64_t seed, const TrainOptions& opts) {
  cfg.validate();
  tune_allocator();
  const Env env(env_cfg);
  Rng rng(derive_seed(seed, kLearnerStream));
  SacLearner learner(cfg, rng);
  ReplayBuffer buffer(cfg.buffer_capacity);

  SeedRun run;
  run.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();

  int episode = 0;
  EnvState s = env.reset(training_episode_seed(seed, episode));
  double ep_return = 0.0;
  std::optional<Vec3> delta_prev;
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  for (std::int64_t t = 0; t < cfg.total_env_steps; ++t) {
    const Observation obs = s.observation();
    Vec3 a_norm;
    if (t < cfg.learning_starts) {
      for (int i = 0; i < kActDim; ++i) a_norm(i) = uniform(rng);
    } else {
      a_norm = squashed_action(learner.actor(), obs, ActionMode::kStochastic, rng);
    }
    const StepResult res = env.step(s, a_norm * env_cfg.delta_max);

    RewardContext ctx;
    ctx.ee_pos = res.state.ee_pos;
    ctx.hand_pos = res.state.hand_pos;
    ctx.contact = res.contact.has_value();
    ctx.normal_force = res.contact ? res.contact->normal_force : 0.0;
    ctx.force_limit = env_cfg.force_limit;
    ctx.delta = res.executed_delta;
    ctx.delta_prev = delta_prev.value_or(res.executed_delta);
    ctx.contact_bonus = opts.contact_bonus;
    const double r = total_reward(ctx, weights);
    delta_prev = res.executed_delta;
    ep_return += r;

    buffer.add({obs, a_norm, r, res.state.observation(), res.done});

    if (t + 1 > cfg.learning_starts && buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      try {
        for (int k = 0; k < cfg.updates_per_step; ++k) learner.update(buffer, rng);
      } catch (const std::runtime_error& e) {
        run.diverged = true;
        run.error = "seed " + std::to_string(seed) + " diverged at step " + std::to_string(t + 1) + ": " + e.what();
        if (opts.log) opts.log(run.error);
        break;
      }
    }

    if (res.done || res.truncated) {
      run.curve.push_back({seed, episode, t + 1, ep_return, res.state.step_index});
      ++episode;
      ep_return = 0.0;
      delta_prev.reset();
      s = env.reset(training_episode_seed(seed, episode));
    } else {
      s = res.state;
    }

    if (opts.checkpoint_dir && cfg.checkpoint_every > 0 && (t + 1) % cfg.checkpoint_every == 0) {
      save_policy(policy_from_actor(learner.actor(), env_cfg.delta_max),
                  *opts.checkpoint_dir / ("seed_" + std::to_string(seed) + "_step_" + std::to_string(t + 1) + ".ckpt"));
    }
    if (opts.log && (t + 1) % 10000 == 0) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      double recent = 0.0;
      const std::size_t n = std::min<std::size_t>(kFinalWindow, run.curve.size());
      for (std::size_t i = run.curve.size() - n; i < run.curve.size(); ++i) recent += run.curve[i].episode_return;
      char msg[200];
      std::snprintf(msg, sizeof(msg), "seed %llu step %lld episodes %d recent_return %.2f temperature %.4f (%.0fs)",
                    static_cast<unsigned long long>(seed), static_cast<long long>(t + 1), episode,
                    n ? recent / n : 0.0, learner.temperature(), secs);
      opts.log(msg);
    }
  }

  run.policy = policy_from_actor(learner.actor(), env_cfg.delta_max);
  const std::size_t n = std::min<std::size_t>(kFinalWindow, run.curve.size());
  if (n > 0) {
    for (std::size_t i = run.curve.size() - n; i < run.curve.size(); ++i) run.final_return += run.curve[i].episode_return;
    run.final_return /= static_cast<double>(n);
  }
  if (opts.checkpoint_dir) save_policy(run.policy, checkpoint_path(*opts.checkpoint_dir, seed));
  return run;
}

TrainResult train(const EnvConfig& env_cfg, const RewardWeights& weights, const AgentConfig& cfg,
                  const TrainOptions& opts) {
  cfg.validate();
  TrainResult result;
  result.runs.resize(cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  TrainOptions local = opts;
  if (opts.log) {
    local.log = [&](const std::string& m) {
      std::lock_guard lock(log_mu);
      opts.log(m);
    };
  }
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      result.runs[i] = train_seed(env_cfg, weights, cfg, cfg.seeds[i], local);
    }
  };
  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(cfg.seeds.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> finals;
  for (const auto& r : result.runs)
    if (!r.diverged) finals.push_back(r.final_return);
  if (!finals.empty()) {
    double m = 0.0;
    for (double f : finals) m += f;
    m /= static_cast<double>(finals.size());
    double v = 0.0;
    for (double f : finals) v += (f - m) * (f - m);
    result.return_mean = m;
    result.return_std = std::sqrt(v / static_cast<double>(finals.size()));
  }
  return result;
}

std::string curves_to_csv(const std::vector<SeedRun>& runs) {
  std::string out = "seed,episode,steps,return,length\n";
  for (const auto& r : runs) {
    for (const auto& c : r.curve) {
      out += std::to_string(c.seed) + ',' + std::to_string(c.episode) + ',' + std::to_string(c.steps) + ',' +
             format_double(c.episode_return) + ',' + std::to_string(c.length) + '\n';
    }
  }
  return out;
}

}  // namespace safecontact
