#include "safecontact/commands.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

#include "safecontact/experiments.hpp"
#include "safecontact/policy_io.hpp"
#include "safecontact/report.hpp"
#include "safecontact/trace_io.hpp"
#include "safecontact/trainer.hpp"

namespace safecontact {

namespace fs = std::filesystem;

namespace {

class PartialFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string preset_label(const RunConfig& cfg) { return cfg.reward.preset.value_or("custom"); }

RolloutSpec rollout_spec(const RunConfig& cfg, ActionMode mode) {
  RolloutSpec spec;
  spec.shield = effective_shield(cfg);
  spec.shield_enabled = cfg.shield.enabled;
  spec.mode = mode;
  spec.reward = effective_weights(cfg);
  spec.contact_bonus = cfg.reward.contact_bonus;
  if (cfg.shield.qp_mode) spec.qp = cfg.shield.clf;
  return spec;
}

std::unique_ptr<Policy> make_policy(const CommandOptions& opts, const RunConfig& cfg) {
  const std::string which =
      opts.checkpoint.value_or(checkpoint_path(cfg.out_dir / "checkpoints", cfg.agent.seeds.front()).string());
  if (which == "overspeed") return std::make_unique<OverspeedPolicy>(cfg.env.delta_max);
  if (which == "zero") return std::make_unique<ZeroPolicy>();
  if (!fs::exists(which)) throw CheckpointError("checkpoint not found: " + which);
  return std::make_unique<MlpPolicy>(load_policy(which));
}

// Removes episode files left by an earlier run so a rerun leaves the same set.
void clear_traces(const fs::path& dir) {
  if (!fs::is_directory(dir)) return;
  std::vector<fs::path> stale;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("ep_", 0) == 0 && e.path().extension() == ".csv") stale.push_back(e.path());
  }
  for (const auto& p : stale) fs::remove(p);
}

void write_snapshot(const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_atomic(dir / "resolved_config.yaml", resolved_config_yaml(cfg));
}

void log_metrics(std::ostream& log, const std::string& label, const Metrics& m) {
  char line[256];
  std::snprintf(line, sizeof(line), "%s: success %.2f%%  T %.3f s  F_max %.2f N  violations %zu  sv %.2f%%\n",
                label.c_str(), m.success_rate, m.T_mean, m.F_max, m.violations, m.sv_rate);
  log << line;
}

bool has_episode_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) return false;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("ep_", 0) == 0 && e.path().extension() == ".csv") return true;
  }
  return false;
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opts) {
  RunConfig cfg = load_run_config(opts.config);
  if (opts.out) cfg.out_dir = *opts.out;
  if (opts.seeds) cfg.agent.seeds = parse_seed_list(*opts.seeds);
  if (opts.episodes) {
    cfg.eval.n_episodes = *opts.episodes;
    cfg.eval.compare_episodes = *opts.episodes;
  }
  if (opts.shield) cfg.shield.enabled = *opts.shield;
  if (opts.workers) cfg.workers = *opts.workers;
  if (opts.preset) {
    const auto names = parse_name_list(*opts.preset);
    if (names.empty()) throw ConfigError("--preset: empty list");
    for (const auto& n : names) {
      try {
        (void)reward_preset(n);
      } catch (const std::invalid_argument&) {
        throw ConfigError("--preset: unknown preset '" + n + "' (expected RF1..RF5)");
      }
    }
    cfg.eval.presets = names;
    if (names.size() == 1) {
      cfg.reward.preset = names.front();
      cfg.reward.weights = reward_preset(names.front());
    }
  }
  cfg.validate();
  return cfg;
}

void cmd_train(const CommandOptions& opts, std::ostream& log) {
  if (opts.preset && parse_name_list(*opts.preset).size() > 1)
    throw ConfigError("train: --preset takes a single preset");
  const RunConfig cfg = resolve_config(opts);
  const RewardWeights weights = effective_weights(cfg);
  const fs::path ckpt_dir = cfg.out_dir / "checkpoints";
  fs::create_directories(ckpt_dir);
  write_snapshot(cfg, cfg.out_dir);

  Json summary;
  summary["name"] = cfg.name;
  summary["preset"] = preset_label(cfg);
  if (cfg.trainer == TrainerKind::kCem) {
    summary["trainer"] = "cem";
    std::ostringstream curves;
    curves << "seed,iteration,elite_mean_return,best_return,mean_norm\n";
    Json seeds = Json::array();
    for (const auto seed : cfg.agent.seeds) {
      CemConfig c = cfg.cem;
      c.seed = seed;
      c.contact_bonus = cfg.reward.contact_bonus;
      const CemResult res = train_cem(cfg.env, weights, c);
      save_policy(res.policy, checkpoint_path(ckpt_dir, seed));
      for (std::size_t i = 0; i < res.elite_mean_return.size(); ++i)
        curves << seed << ',' << i << ',' << format_double(res.elite_mean_return[i]) << ','
               << format_double(res.best_return[i]) << ',' << format_double(res.mean_norm[i]) << '\n';
      if (res.elite_mean_return.empty()) {
        seeds.push_back(Json{{"seed", seed}, {"final_elite_return", nullptr}});
        continue;
      }
      seeds.push_back(Json{{"seed", seed}, {"final_elite_return", res.elite_mean_return.back()}});
      log << "seed " << seed << ": elite return " << res.elite_mean_return.back() << "\n";
    }
    summary["seeds"] = std::move(seeds);
    write_text_atomic(cfg.out_dir / "curves.csv", curves.str());
    write_text_atomic(cfg.out_dir / "train_summary.json", summary.dump(2) + "\n");
    return;
  }

  TrainOptions topts;
  topts.checkpoint_dir = ckpt_dir;
  topts.workers = cfg.workers;
  topts.contact_bonus = cfg.reward.contact_bonus;
  topts.log = [&log](const std::string& m) { log << m << std::endl; };
  const TrainResult res = train(cfg.env, weights, cfg.agent, topts);
  write_text_atomic(cfg.out_dir / "curves.csv", curves_to_csv(res.runs));

  summary["trainer"] = "sac";
  Json seeds = Json::array();
  std::size_t diverged = 0;
  for (const auto& run : res.runs) {
    Json s;
    s["seed"] = run.seed;
    s["episodes"] = run.curve.size();
    s["final_return"] = std::isfinite(run.final_return) ? Json(run.final_return) : Json(nullptr);
    s["diverged"] = run.diverged;
    if (!run.error.empty()) s["error"] = run.error;
    seeds.push_back(std::move(s));
    if (run.diverged) ++diverged;
  }
  summary["seeds"] = std::move(seeds);
  summary["return_mean"] = std::isfinite(res.return_mean) ? Json(res.return_mean) : Json(nullptr);
  summary["return_std"] = std::isfinite(res.return_std) ? Json(res.return_std) : Json(nullptr);
  write_text_atomic(cfg.out_dir / "train_summary.json", summary.dump(2) + "\n");
  log << "return " << res.return_mean << " +/- " << res.return_std << " over " << res.runs.size() - diverged
      << " seed(s)\n";
  if (diverged == res.runs.size()) throw std::runtime_error("train: every seed diverged");
}

void cmd_eval(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const auto policy = make_policy(opts, cfg);
  const fs::path dir = cfg.out_dir / "eval";
  const fs::path traces_dir = dir / "traces";
  write_snapshot(cfg, dir);
  clear_traces(traces_dir);
  BatchOptions bopts;
  bopts.trace_dir = traces_dir;
  bopts.workers = cfg.workers;
  auto traces = batch_rollout(*policy, cfg.env, rollout_spec(cfg, cfg.eval.mode), cfg.eval.n_episodes,
                              cfg.eval.seed0, bopts);
  ReportInputs in;
  in.dt = cfg.env.dt;
  in.force_limit = cfg.env.force_limit;
  in.energy_budget = cfg.shield.cfg.energy_budget;
  const std::string label = preset_label(cfg);
  in.groups.push_back({label, std::move(traces)});
  emit_report(in, dir);
  log_metrics(log, label, compute_metrics(in.groups.front().traces, cfg.env.dt));
}

void cmd_ablate(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path dir = cfg.out_dir / "ablate";
  write_snapshot(cfg, dir);
  for (const auto& p : cfg.eval.presets) clear_traces(dir / "traces" / p);

  auto loader = [&](const std::string& preset) -> PolicyParams {
    const fs::path path = expand_checkpoint_template(cfg.eval.checkpoints, preset, cfg.eval.checkpoint_seed);
    if (!fs::exists(path)) {
      if (!opts.train_missing) throw CheckpointError("missing checkpoint for " + preset + ": " + path.string());
      log << preset << ": training seed " << cfg.eval.checkpoint_seed << "\n";
      TrainOptions topts;
      topts.contact_bonus = cfg.reward.contact_bonus;
      SeedRun run = train_seed(cfg.env, reward_preset(preset), cfg.agent, cfg.eval.checkpoint_seed, topts);
      if (run.diverged) throw std::runtime_error(preset + ": training diverged: " + run.error);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      save_policy(run.policy, path);
      return run.policy;
    }
    return load_policy(path);
  };

  AblationSettings s;
  s.env = cfg.env;
  s.shield = effective_shield(cfg);
  s.n_eval = cfg.eval.n_episodes;
  s.seed0 = cfg.eval.seed0;
  s.mode = cfg.eval.mode;
  s.contact_bonus = cfg.reward.contact_bonus;
  s.workers = cfg.workers;
  s.trace_root = dir / "traces";
  auto rows = run_ablation(cfg.eval.presets, loader, s);

  ReportInputs in;
  in.dt = cfg.env.dt;
  in.force_limit = cfg.env.force_limit;
  in.energy_budget = cfg.shield.cfg.energy_budget;
  for (auto& row : rows) {
    if (row.ok) {
      log_metrics(log, row.preset, row.metrics);
      in.groups.push_back({row.preset, std::move(row.traces)});
    } else {
      log << row.preset << ": FAILED: " << row.error << "\n";
      in.failures.emplace_back(row.preset, row.error);
    }
  }
  if (in.groups.empty()) throw std::runtime_error("ablate: no preset could be evaluated");
  emit_report(in, dir);
  if (!in.failures.empty())
    throw PartialFailure("ablate: " + std::to_string(in.failures.size()) + " preset(s) failed");
}

void cmd_shield_compare(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const auto policy = make_policy(opts, cfg);
  const fs::path dir = cfg.out_dir / "shield_compare";
  write_snapshot(cfg, dir);
  clear_traces(dir / "traces" / "unshielded");
  clear_traces(dir / "traces" / "shielded");
  const ShieldComparison cmp = compare_shield(*policy, cfg.env, rollout_spec(cfg, cfg.eval.compare_mode),
                                              cfg.eval.compare_episodes, cfg.eval.seed0, cfg.workers, dir / "traces");
  emit_shield_report(cmp, dir);
  log << "unshielded: max KE " << cmp.unshielded.max_ke << " J, exceedances " << cmp.unshielded.exceed_steps
      << " step(s) in " << cmp.unshielded.exceed_episodes << " episode(s)\n";
  log << "shielded:   max KE " << cmp.shielded.max_ke << " J, exceedances " << cmp.shielded.exceed_steps
      << ", interventions " << cmp.shielded.interventions << "\n";
}

void cmd_replay(const CommandOptions& opts, std::ostream& log) {
  if (!opts.trace) throw ConfigError("replay: --trace PATH is required");
  const RunConfig cfg = resolve_config(opts);
  const fs::path src = *opts.trace;
  std::vector<fs::path> files;
  if (fs::is_directory(src)) {
    for (const auto& e : fs::directory_iterator(src))
      if (e.path().extension() == ".csv" && e.path().filename().string().rfind("ep_", 0) == 0)
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (fs::exists(src)) {
    files.push_back(src);
  }
  if (files.empty()) throw std::runtime_error("replay: no trace files at " + src.string());

  const ShieldConfig shield = effective_shield(cfg);
  const double m = shield.mass;
  const fs::path dir = cfg.out_dir / "replay";
  write_snapshot(cfg, dir);
  Json items = Json::array();
  std::size_t total = 0;
  for (const auto& f : files) {
    const EpisodeTrace tr = read_trace_csv(f);
    std::ostringstream csv;
    csv << "t,ax_raw,ay_raw,az_raw,ax_safe,ay_safe,az_safe,intervened,ke_raw,ke_safe\n";
    LpfState lpf = tr.command_raw.empty() ? LpfState{} : LpfState::primed(tr.command_raw.front());
    std::size_t interventions = 0;
    double max_raw = 0.0, max_safe = 0.0;
    for (std::size_t t = 0; t < tr.command_raw.size(); ++t) {
      const Vec3& v = tr.command_raw[t];
      Vec3 out = v;
      bool hit = false;
      if (cfg.shield.enabled) {
        const ShieldStep st = shield_pipeline(lpf, v, shield);
        lpf = st.state;
        out = st.v_safe;
        hit = st.intervened;
      }
      interventions += hit;
      const double ke_raw = 0.5 * m * v.squaredNorm();
      const double ke_safe = 0.5 * m * out.squaredNorm();
      max_raw = std::max(max_raw, ke_raw);
      max_safe = std::max(max_safe, ke_safe);
      csv << t << ',' << format_double(v.x()) << ',' << format_double(v.y()) << ',' << format_double(v.z()) << ','
          << format_double(out.x()) << ',' << format_double(out.y()) << ',' << format_double(out.z()) << ','
          << int(hit) << ',' << format_double(ke_raw) << ',' << format_double(ke_safe) << '\n';
    }
    write_text_atomic(dir / f.filename(), csv.str());
    total += interventions;
    items.push_back(Json{{"file", f.filename().string()},
                         {"steps", tr.command_raw.size()},
                         {"interventions", interventions},
                         {"max_ke_raw", max_raw},
                         {"max_ke_safe", max_safe}});
  }
  Json summary;
  summary["shield_enabled"] = cfg.shield.enabled;
  summary["traces"] = files.size();
  summary["interventions"] = total;
  summary["items"] = std::move(items);
  write_text_atomic(dir / "replay.json", summary.dump(2) + "\n");
  log << "replayed " << files.size() << " trace(s), " << total << " intervention(s)\n";
}

void cmd_report(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path src = opts.trace.value_or(cfg.out_dir / "eval" / "traces");
  if (!fs::is_directory(src)) throw std::runtime_error("report: trace directory not found: " + src.string());
  ReportInputs in;
  in.dt = cfg.env.dt;
  in.force_limit = cfg.env.force_limit;
  in.energy_budget = cfg.shield.cfg.energy_budget;
  if (has_episode_files(src)) {
    in.groups.push_back({src.filename().string(), read_trace_dir(src)});
  } else {
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(src))
      if (e.is_directory() && has_episode_files(e.path())) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& d : subdirs) in.groups.push_back({d.filename().string(), read_trace_dir(d)});
  }
  if (in.groups.empty()) throw std::runtime_error("report: no traces under " + src.string());
  const fs::path dir = cfg.out_dir / "report";
  emit_report(in, dir);
  write_snapshot(cfg, dir);
  for (const auto& g : in.groups) log_metrics(log, g.label, compute_metrics(g.traces, cfg.env.dt));
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    if (name == "train") cmd_train(opts, log);
    else if (name == "eval") cmd_eval(opts, log);
    else if (name == "ablate") cmd_ablate(opts, log);
    else if (name == "shield-compare") cmd_shield_compare(opts, log);
    else if (name == "replay") cmd_replay(opts, log);
    else if (name == "report") cmd_report(opts, log);
    else {
      err << "error: unknown command '" << name << "'\n";
      return kExitUsage;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace safecontact
