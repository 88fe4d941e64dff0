#include "safecontact/rollout.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "safecontact/trace_io.hpp"

namespace safecontact {

Vec3 displacement_within_limit(const Vec3& v_safe, double dt, double v_max) {
  Vec3 delta = v_safe * dt;
  while ((delta / dt).norm() > v_max) delta *= 1.0 - std::numeric_limits<double>::epsilon();
  return delta;
}

EpisodeTrace run_episode(const Policy& policy, const Env& env, const RolloutSpec& spec, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = env.config().dt;
  const double mass = spec.shield.mass;
  const double v_max = spec.shield.speed_limit();
  if (spec.shield_enabled) spec.shield.validate();

  EpisodeTrace tr;
  tr.seed = seed;
  Rng rng(derive_seed(seed, kPolicyStream));
  EnvState s = env.reset(seed);

  const Vec3 first = policy.act(s.observation(), spec.mode, rng);
  if (!first.allFinite()) throw NumericError("run_episode: policy returned a non-finite action");
  LpfState lpf = LpfState::primed(first / dt);
  double ke_prev = 0.0;
  std::optional<Vec3> delta_prev;

  const auto reserve = static_cast<std::size_t>(env.config().horizon);
  tr.distance.reserve(reserve);
  tr.kinetic_energy.reserve(reserve);
  tr.speed.reserve(reserve);

  for (;;) {
    const Vec3 a_raw = policy.act(s.observation(), spec.mode, rng);
    const Vec3 v_raw = a_raw / dt;
    Vec3 v_filt = v_raw;
    Vec3 v_safe = v_raw;
    bool intervened = false;
    Vec3 delta = a_raw;
    if (spec.shield_enabled) {
      const ShieldStep sh = shield_pipeline(lpf, v_raw, spec.shield);
      lpf = sh.state;
      v_filt = sh.v_filtered;
      v_safe = sh.v_safe;
      intervened = sh.intervened;
      if (spec.qp) {
        const Vec3 u = shield_qp(s.ee_vel, v_safe, s.ee_pos, s.hand_pos, spec.shield, *spec.qp).u;
        const Vec3 u_safe = ke_project(u, spec.shield);
        if (u_safe != v_safe) intervened = true;
        v_safe = u_safe;
      }
      delta = displacement_within_limit(v_safe, dt, v_max);
    }

    const StepResult res = env.step(s, delta);
    const double spd = res.state.ee_vel.norm();
    const double ke = 0.5 * mass * spd * spd;
    const double d = distance_to_goal(res.state);

    tr.distance.push_back(d);
    tr.kinetic_energy.push_back(ke);
    tr.speed.push_back(spd);
    tr.command_raw.push_back(v_raw);
    tr.command_filtered.push_back(v_filt);
    tr.command_safe.push_back(v_safe);
    tr.velocity.push_back(res.state.ee_vel);
    tr.intervened.push_back(intervened ? 1 : 0);

    if (spec.reward) {
      RewardContext ctx;
      ctx.ee_pos = res.state.ee_pos;
      ctx.hand_pos = res.state.hand_pos;
      ctx.contact = res.contact.has_value();
      ctx.normal_force = res.contact ? res.contact->normal_force : 0.0;
      ctx.force_limit = env.config().force_limit;
      ctx.delta = res.executed_delta;
      ctx.delta_prev = delta_prev.value_or(res.executed_delta);
      ctx.contact_bonus = spec.contact_bonus;
      tr.episode_return += total_reward(ctx, *spec.reward);
    }
    delta_prev = res.executed_delta;

    if (res.done || res.truncated) {
      tr.f_contact = res.contact ? res.contact->normal_force : 0.0;
      tr.ke_contact = ke_prev;
      tr.success = res.done;
      tr.violation = res.contact && res.contact->violation;
      tr.steps = res.state.step_index;
      break;
    }
    ke_prev = ke;
    s = res.state;
  }
  tr.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return tr;
}

std::filesystem::path trace_file_name(const std::filesystem::path& dir, std::uint64_t seed) {
  char name[64];
  std::snprintf(name, sizeof(name), "ep_%08llu.csv", static_cast<unsigned long long>(seed));
  return dir / name;
}

std::vector<EpisodeTrace> batch_rollout(const Policy& policy, const EnvConfig& env_cfg, const RolloutSpec& spec,
                                        std::size_t n_episodes, std::uint64_t seed0, const BatchOptions& opts) {
  if (n_episodes == 0) throw std::invalid_argument("batch_rollout: n_episodes must be >= 1");
  const Env env(env_cfg);
  if (opts.trace_dir) std::filesystem::create_directories(*opts.trace_dir);

  std::vector<std::optional<EpisodeTrace>> slots(n_episodes);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      if (opts.keep_going && !opts.keep_going(finished.load())) {
        stop = true;
        return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= n_episodes) return;
      try {
        EpisodeTrace tr = run_episode(policy, env, spec, seed0 + i);
        if (opts.trace_dir) write_trace_csv(tr, trace_file_name(*opts.trace_dir, tr.seed));
        slots[i] = std::move(tr);
        ++finished;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
        stop = true;
        return;
      }
    }
  };

  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<EpisodeTrace> out;
  for (auto& s : slots) {
    if (!s) break;
    out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace safecontact
