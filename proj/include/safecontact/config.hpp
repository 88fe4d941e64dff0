#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "safecontact/cem.hpp"
#include "safecontact/env.hpp"
#include "safecontact/policy.hpp"
#include "safecontact/reward.hpp"
#include "safecontact/sac.hpp"
#include "safecontact/shield.hpp"

namespace safecontact {

/// Bad or unknown configuration. The message carries `file:line:col:` when
/// the problem can be located in the source text.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrainerKind { kSac, kCem };

struct RewardSection {
  std::optional<std::string> preset{"RF5"};  // empty -> explicit weights
  RewardWeights weights = reward_preset("RF5");
  double contact_bonus = 500.0;
};

struct ShieldSection {
  bool enabled = true;
  ShieldConfig cfg;
  ShieldProfile profile = ShieldProfile::kSim;
  bool qp_mode = false;
  ClfConfig clf;
};

struct EvalSection {
  std::size_t n_episodes = 200;
  ActionMode mode = ActionMode::kDeterministic;
  std::uint64_t seed0 = 1000000;
  std::vector<std::string> presets{"RF1", "RF2", "RF3", "RF4", "RF5"};
  /// Checkpoint path template; "{preset}" and "{seed}" are substituted.
  std::string checkpoints = "runs/{preset}/checkpoints/seed_{seed}.ckpt";
  std::uint64_t checkpoint_seed = 0;
  std::size_t compare_episodes = 100;
  ActionMode compare_mode = ActionMode::kStochastic;
};

struct RunConfig {
  std::string name = "run";
  std::filesystem::path out_dir = "runs/run";
  TrainerKind trainer = TrainerKind::kSac;
  int workers = 1;
  EnvConfig env;
  bool impact_gain_calibrated = true;
  RewardSection reward;
  AgentConfig agent;
  CemConfig cem;
  ShieldSection shield;
  EvalSection eval;

  /// Throws ConfigError naming the section of the first invalid value.
  void validate() const;
};

/// Prefix of environment overrides: SAFECONTACT_<SECTION>_<KEY>, with the
/// key upper-cased (e.g. SAFECONTACT_AGENT_TOTAL_ENV_STEPS=1000). Values are
/// parsed as YAML scalars or flow collections.
inline constexpr const char* kEnvOverridePrefix = "SAFECONTACT_";

/// Parses YAML text. Unknown sections or keys and ill-typed values raise
/// ConfigError. `origin` names the source in diagnostics.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<string>",
                           bool apply_env_overrides = true);

/// Throws ConfigError when the file is missing or invalid.
RunConfig load_run_config(const std::filesystem::path& path, bool apply_env_overrides = true);

/// Fully explicit YAML of the config. Doubles are written with 17
/// significant digits so parsing the snapshot reproduces every value.
std::string resolved_config_yaml(const RunConfig& cfg);

/// Shield settings with the filter period taken from the profile.
ShieldConfig effective_shield(const RunConfig& cfg);

/// Reward weights of the configured preset or explicit weights.
RewardWeights effective_weights(const RunConfig& cfg);

std::filesystem::path expand_checkpoint_template(const std::string& tmpl, const std::string& preset,
                                                 std::uint64_t seed);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<std::string> parse_name_list(const std::string& text);

}  // namespace safecontact
