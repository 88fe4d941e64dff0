// Command-line entry point: train, eval, ablate, shield-compare, replay, report.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "safecontact/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string seeds;
  std::size_t episodes = 0;
  std::string shield;
  std::string preset;
  int workers = 0;
  std::string checkpoint;
  std::string trace;
  bool train_missing = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Run config file (YAML)")->required();
  cmd->add_option("--out", f.out, "Run directory (overrides run.out)");
  cmd->add_option("--seeds", f.seeds, "Seed list, e.g. 0,1,2 or 0-4");
  cmd->add_option("--episodes", f.episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  cmd->add_option("--shield", f.shield, "Shield on|off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--preset", f.preset, "RF1..RF5 (comma list for ablate)");
  cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
}

safecontact::CommandOptions to_options(const Flags& f) {
  safecontact::CommandOptions o;
  o.config = f.config;
  if (!f.out.empty()) o.out = f.out;
  if (!f.seeds.empty()) o.seeds = f.seeds;
  if (f.episodes > 0) o.episodes = f.episodes;
  if (!f.shield.empty()) o.shield = f.shield == "on";
  if (!f.preset.empty()) o.preset = f.preset;
  if (f.workers > 0) o.workers = f.workers;
  if (!f.checkpoint.empty()) o.checkpoint = f.checkpoint;
  if (!f.trace.empty()) o.trace = f.trace;
  o.train_missing = f.train_missing;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe-contact reaching: training, evaluation and shield analysis"};
  app.require_subcommand(1);
  Flags f;

  auto* train = app.add_subcommand("train", "Train every configured seed");
  add_common(train, f);
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and write traces and a report");
  add_common(eval, f);
  eval->add_option("--checkpoint", f.checkpoint, "Checkpoint file, or 'overspeed' / 'zero'");
  auto* ablate = app.add_subcommand("ablate", "Evaluate one checkpoint per reward preset");
  add_common(ablate, f);
  ablate->add_flag("--train-missing", f.train_missing, "Train presets whose checkpoint is absent");
  auto* compare = app.add_subcommand("shield-compare", "Paired shielded / unshielded rollouts");
  add_common(compare, f);
  compare->add_option("--checkpoint", f.checkpoint, "Checkpoint file, or 'overspeed' / 'zero'");
  auto* replay = app.add_subcommand("replay", "Re-run saved raw commands through the shield");
  add_common(replay, f);
  replay->add_option("--trace", f.trace, "Trace CSV or directory of traces")->required();
  auto* report = app.add_subcommand("report", "Rebuild summary, tables and plots from traces");
  add_common(report, f);
  report->add_option("--trace", f.trace, "Trace directory (default <out>/eval/traces)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? safecontact::kExitOk : safecontact::kExitUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  return safecontact::run_command(name, to_options(f), std::cout, std::cerr);
}
