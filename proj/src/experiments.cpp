#include "safecontact/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace safecontact {

std::vector<AblationRow> run_ablation(const std::vector<std::string>& presets,
                                      const std::function<PolicyParams(const std::string&)>& load_policy_for,
                                      const AblationSettings& settings) {
  std::vector<AblationRow> rows;
  for (const std::string& preset : presets) {
    AblationRow row;
    row.preset = preset;
    try {
      const RewardWeights weights = reward_preset(preset);
      const MlpPolicy policy(load_policy_for(preset));
      RolloutSpec spec;
      spec.shield = settings.shield;
      spec.shield_enabled = false;
      spec.mode = settings.mode;
      spec.reward = weights;
      spec.contact_bonus = settings.contact_bonus;
      BatchOptions opts;
      opts.workers = settings.workers;
      if (settings.trace_root) opts.trace_dir = *settings.trace_root / preset;
      row.traces = batch_rollout(policy, settings.env, spec, settings.n_eval, settings.seed0, opts);
      row.metrics = compute_metrics(row.traces, settings.env.dt);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ConditionReport summarize_condition(std::vector<EpisodeTrace> traces, double dt, double energy_budget) {
  ConditionReport r;
  r.metrics = compute_metrics(traces, dt);
  std::size_t longest = 0;
  for (const auto& tr : traces) longest = std::max(longest, tr.kinetic_energy.size());
  r.ke_max.assign(longest, 0.0);
  r.ke_mean.assign(longest, 0.0);
  r.speed_max.assign(longest, 0.0);
  r.speed_mean.assign(longest, 0.0);
  std::vector<std::size_t> count(longest, 0);
  for (const auto& tr : traces) {
    bool exceeded = false;
    for (std::size_t t = 0; t < tr.kinetic_energy.size(); ++t) {
      const double ke = tr.kinetic_energy[t];
      const double spd = tr.speed[t];
      if (ke > energy_budget + kEnergyTolerance) {
        ++r.exceed_steps;
        exceeded = true;
      }
      r.max_ke = std::max(r.max_ke, ke);
      r.max_speed = std::max(r.max_speed, spd);
      r.ke_max[t] = std::max(r.ke_max[t], ke);
      r.speed_max[t] = std::max(r.speed_max[t], spd);
      r.ke_mean[t] += ke;
      r.speed_mean[t] += spd;
      ++count[t];
      r.interventions += tr.intervened[t];
    }
    if (exceeded) ++r.exceed_episodes;
  }
  for (std::size_t t = 0; t < longest; ++t) {
    r.ke_mean[t] /= static_cast<double>(count[t]);
    r.speed_mean[t] /= static_cast<double>(count[t]);
  }
  r.traces = std::move(traces);
  return r;
}

ShieldComparison compare_shield(const Policy& policy, const EnvConfig& env, const RolloutSpec& base,
                                std::size_t n, std::uint64_t seed0, int workers,
                                const std::optional<std::filesystem::path>& trace_root) {
  ShieldComparison out;
  out.n = n;
  out.energy_budget = base.shield.energy_budget;
  for (const bool enabled : {false, true}) {
    RolloutSpec spec = base;
    spec.shield_enabled = enabled;
    BatchOptions opts;
    opts.workers = workers;
    if (trace_root) opts.trace_dir = *trace_root / (enabled ? "shielded" : "unshielded");
    auto traces = batch_rollout(policy, env, spec, n, seed0, opts);
    (enabled ? out.shielded : out.unshielded) = summarize_condition(std::move(traces), env.dt, base.shield.energy_budget);
  }
  const double a = out.shielded.metrics.T_mean;
  const double b = out.unshielded.metrics.T_mean;
  out.completion_time_delta = (std::isnan(a) || std::isnan(b)) ? std::numeric_limits<double>::quiet_NaN() : a - b;
  return out;
}

}  // namespace safecontact
