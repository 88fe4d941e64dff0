#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safecontact/metrics.hpp"
#include "safecontact/rollout.hpp"

namespace safecontact {

struct AblationRow {
  std::string preset;
  bool ok = false;
  std::string error;
  Metrics metrics;
  std::vector<EpisodeTrace> traces;
};

struct AblationSettings {
  EnvConfig env;
  ShieldConfig shield;  // used only for KE logging; evaluation is unshielded
  std::size_t n_eval = 200;
  std::uint64_t seed0 = 1000000;
  ActionMode mode = ActionMode::kDeterministic;
  double contact_bonus = 500.0;
  int workers = 1;
  /// When set, traces go to <trace_root>/<preset>/.
  std::optional<std::filesystem::path> trace_root;
};

/// Evaluates one checkpoint per preset. A loader failure marks that row
/// as failed and the remaining presets still run.
std::vector<AblationRow> run_ablation(const std::vector<std::string>& presets,
                                      const std::function<PolicyParams(const std::string&)>& load_policy_for,
                                      const AblationSettings& settings);

/// Per-condition outcome of the shielded/unshielded comparison.
struct ConditionReport {
  std::vector<EpisodeTrace> traces;
  Metrics metrics;
  std::size_t exceed_steps = 0;     // steps with KE > E_max + 1e-9
  std::size_t exceed_episodes = 0;  // episodes with at least one such step
  double max_ke = 0.0;
  double max_speed = 0.0;
  std::size_t interventions = 0;
  // Per-step envelopes across episodes still running at that step.
  std::vector<double> ke_max, ke_mean, speed_max, speed_mean;
};

struct ShieldComparison {
  std::size_t n = 0;
  double energy_budget = 0.0;
  ConditionReport unshielded;
  ConditionReport shielded;
  /// Mean completion time shielded minus unshielded (successful episodes); NaN
  /// when either condition has no success.
  double completion_time_delta = 0.0;
};

inline constexpr double kEnergyTolerance = 1e-9;

ConditionReport summarize_condition(std::vector<EpisodeTrace> traces, double dt, double energy_budget);

/// Runs n episodes per condition on matched seeds, so both conditions see
/// the same hand poses and the same action-sampling noise. `base` supplies
/// shield settings, action mode and reward; its enabled flag is ignored.
ShieldComparison compare_shield(const Policy& policy, const EnvConfig& env, const RolloutSpec& base,
                                std::size_t n, std::uint64_t seed0, int workers = 1,
                                const std::optional<std::filesystem::path>& trace_root = {});

}  // namespace safecontact
