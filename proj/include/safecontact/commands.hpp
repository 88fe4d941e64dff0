#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "safecontact/config.hpp"

namespace safecontact {

/// Stable exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Command-line flags layered on top of the config file.
struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> seeds;     // "0,1,2" or "0-4"
  std::optional<std::size_t> episodes;
  std::optional<bool> shield;
  std::optional<std::string> preset;    // one preset, or a comma list for ablate
  std::optional<int> workers;
  /// Checkpoint for eval / shield-compare; the literal "overspeed" selects
  /// the scripted over-speed policy.
  std::optional<std::string> checkpoint;
  std::optional<std::filesystem::path> trace;  // replay input: file or directory
  bool train_missing = false;                  // ablate: train absent checkpoints
};

/// Invalid flag values raise ConfigError.
RunConfig resolve_config(const CommandOptions& opts);

void cmd_train(const CommandOptions& opts, std::ostream& log);
void cmd_eval(const CommandOptions& opts, std::ostream& log);
void cmd_ablate(const CommandOptions& opts, std::ostream& log);
void cmd_shield_compare(const CommandOptions& opts, std::ostream& log);
void cmd_replay(const CommandOptions& opts, std::ostream& log);
void cmd_report(const CommandOptions& opts, std::ostream& log);

/// Dispatches by name and maps exceptions to exit codes: ConfigError and
/// unknown commands give 2, everything else 1. Errors go to `err`.
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace safecontact
