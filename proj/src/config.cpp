#include "safecontact/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "safecontact/trace_io.hpp"

extern char** environ;

namespace safecontact {

namespace {

struct Reader {
  std::string origin;

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const YAML::Mark m = at.IsDefined() ? at.Mark() : YAML::Mark::null_mark();
    if (m.is_null()) throw ConfigError(origin + ": " + msg);
    throw ConfigError(origin + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": " + msg);
  }

  double real(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + ": expected a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, key + ": value must be finite");
      return v;
    } catch (const YAML::Exception&) {
      fail(n, key + ": expected a number, got '" + n.Scalar() + "'");
    }
  }

  std::int64_t integer(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + ": expected an integer");
    try {
      return n.as<std::int64_t>();
    } catch (const YAML::Exception&) {
      fail(n, key + ": expected an integer, got '" + n.Scalar() + "'");
    }
  }

  std::uint64_t unsigned_int(const YAML::Node& n, const std::string& key) const {
    const std::int64_t v = integer(n, key);
    if (v < 0) fail(n, key + ": must be non-negative");
    return static_cast<std::uint64_t>(v);
  }

  bool boolean(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + ": expected true or false");
    try {
      return n.as<bool>();
    } catch (const YAML::Exception&) {
      fail(n, key + ": expected true or false, got '" + n.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, key + ": expected a string");
    return n.Scalar();
  }

  template <typename F>
  void sequence(const YAML::Node& n, const std::string& key, F&& each) const {
    if (!n.IsSequence()) fail(n, key + ": expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) each(n[i], key + "[" + std::to_string(i) + "]");
  }

  Vec3 vec3(const YAML::Node& n, const std::string& key) const {
    if (!n.IsSequence() || n.size() != 3) fail(n, key + ": expected a list of three numbers");
    return {real(n[0], key), real(n[1], key), real(n[2], key)};
  }
};

using Handler = std::function<void(const YAML::Node&, const std::string&)>;

void dispatch(const Reader& r, const YAML::Node& section, const std::string& name,
              const std::map<std::string, Handler>& handlers) {
  if (!section || section.IsNull()) return;
  if (!section.IsMap()) r.fail(section, name + ": expected a mapping");
  for (const auto& kv : section) {
    const std::string key = kv.first.Scalar();
    const auto it = handlers.find(key);
    if (it == handlers.end()) r.fail(kv.first, "unknown key '" + name + "." + key + "'");
    it->second(kv.second, name + "." + key);
  }
}

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"run", {"name", "out", "trainer", "workers"}},
      {"env",
       {"dt", "delta_max", "grasp_tol", "horizon", "hand_mass", "object_mass", "mu_hand", "mu_object", "F_tau", "k_v",
        "workspace", "home"}},
      {"reward", {"preset", "weights", "contact_bonus"}},
      {"agent",
       {"gamma", "lr_actor", "lr_critic", "batch_size", "tau_polyak", "buffer_capacity", "updates_per_step",
        "hidden_layers", "seeds", "total_env_steps", "learning_starts", "entropy", "init_temperature",
        "target_entropy", "checkpoint_every"}},
      {"cem", {"iterations", "population", "elite_fraction", "init_std", "min_std", "episodes_per_candidate"}},
      {"shield", {"enabled", "m", "E_max", "f_c", "alpha_h", "profile", "qp_mode", "lambda", "rho"}},
      {"eval",
       {"n_episodes", "mode", "seed0", "presets", "checkpoints", "checkpoint_seed", "compare_episodes",
        "compare_mode"}},
  };
  return keys;
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void apply_overrides(YAML::Node& root) {
  std::vector<std::pair<std::string, std::string>> vars;
  const std::string prefix = kEnvOverridePrefix;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    vars.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }
  std::sort(vars.begin(), vars.end());
  for (const auto& [name, value] : vars) {
    const std::string rest = name.substr(prefix.size());
    bool matched = false;
    for (const auto& [section, keys] : known_keys()) {
      const std::string sec = upper(section) + "_";
      if (rest.rfind(sec, 0) != 0) continue;
      const std::string key_part = rest.substr(sec.size());
      for (const auto& key : keys) {
        if (upper(key) != key_part) continue;
        YAML::Node parsed;
        try {
          parsed = YAML::Load(value);
        } catch (const YAML::Exception& ex) {
          throw ConfigError("environment " + name + ": " + ex.msg);
        }
        if (!root[section] || root[section].IsNull()) root[section] = YAML::Node(YAML::NodeType::Map);
        root[section][key] = parsed;
        matched = true;
      }
    }
    if (!matched) throw ConfigError("environment " + name + ": no such config key");
  }
}

TrainerKind parse_trainer(const Reader& r, const YAML::Node& n, const std::string& key) {
  const std::string s = r.text(n, key);
  if (s == "sac") return TrainerKind::kSac;
  if (s == "cem") return TrainerKind::kCem;
  r.fail(n, key + ": expected sac or cem, got '" + s + "'");
}

std::string check_preset(const Reader& r, const YAML::Node& n, const std::string& key) {
  const std::string s = r.text(n, key);
  try {
    (void)reward_preset(s);
  } catch (const std::invalid_argument&) {
    r.fail(n, key + ": unknown preset '" + s + "' (expected RF1..RF5)");
  }
  return s;
}

ActionMode parse_mode(const Reader& r, const YAML::Node& n, const std::string& key) {
  try {
    return parse_action_mode(r.text(n, key));
  } catch (const std::invalid_argument&) {
    r.fail(n, key + ": expected deterministic or stochastic");
  }
}

RunConfig from_yaml(const YAML::Node& root, const Reader& r) {
  RunConfig c;
  if (!root || root.IsNull()) return c;
  if (!root.IsMap()) r.fail(root, "top level must be a mapping");
  for (const auto& kv : root)
    if (!known_keys().count(kv.first.Scalar())) r.fail(kv.first, "unknown section '" + kv.first.Scalar() + "'");

  dispatch(r, root["run"], "run",
           {{"name", [&](const auto& n, const auto& k) { c.name = r.text(n, k); }},
            {"out", [&](const auto& n, const auto& k) { c.out_dir = r.text(n, k); }},
            {"trainer", [&](const auto& n, const auto& k) { c.trainer = parse_trainer(r, n, k); }},
            {"workers", [&](const auto& n, const auto& k) { c.workers = static_cast<int>(r.integer(n, k)); }}});

  auto& e = c.env;
  dispatch(r, root["env"], "env",
           {{"dt", [&](const auto& n, const auto& k) { e.dt = r.real(n, k); }},
            {"delta_max", [&](const auto& n, const auto& k) { e.delta_max = r.real(n, k); }},
            {"grasp_tol", [&](const auto& n, const auto& k) { e.grasp_tol = r.real(n, k); }},
            {"horizon", [&](const auto& n, const auto& k) { e.horizon = static_cast<int>(r.integer(n, k)); }},
            {"hand_mass", [&](const auto& n, const auto& k) { e.hand_mass = r.real(n, k); }},
            {"object_mass", [&](const auto& n, const auto& k) { e.object_mass = r.real(n, k); }},
            {"mu_hand", [&](const auto& n, const auto& k) { e.mu_hand = r.real(n, k); }},
            {"mu_object", [&](const auto& n, const auto& k) { e.mu_object = r.real(n, k); }},
            {"F_tau", [&](const auto& n, const auto& k) { e.force_limit = r.real(n, k); }},
            {"k_v",
             [&](const auto& n, const auto& k) {
               if (n.IsScalar() && n.Scalar() == "calibrated") {
                 c.impact_gain_calibrated = true;
               } else {
                 c.impact_gain_calibrated = false;
                 e.impact_gain = r.real(n, k);
               }
             }},
            {"workspace",
             [&](const auto& n, const auto& k) {
               const char* axes[] = {"x", "y", "z"};
               if (!n.IsMap()) r.fail(n, k + ": expected a mapping with x, y, z");
               for (const auto& a : n) {
                 const std::string ax = a.first.Scalar();
                 const auto it = std::find(std::begin(axes), std::end(axes), ax);
                 if (it == std::end(axes)) r.fail(a.first, "unknown key '" + k + "." + ax + "'");
                 if (!a.second.IsSequence() || a.second.size() != 2)
                   r.fail(a.second, k + "." + ax + ": expected [min, max]");
                 auto& range = e.workspace[static_cast<std::size_t>(it - std::begin(axes))];
                 range.min = r.real(a.second[0], k + "." + ax);
                 range.max = r.real(a.second[1], k + "." + ax);
               }
             }},
            {"home", [&](const auto& n, const auto& k) { e.home = r.vec3(n, k); }}});

  bool explicit_weights = false;
  bool named_preset = false;
  YAML::Node weights_node;
  dispatch(r, root["reward"], "reward",
           {{"preset",
             [&](const auto& n, const auto& k) {
               if (n.IsNull()) {
                 c.reward.preset.reset();
                 return;
               }
               c.reward.preset = check_preset(r, n, k);
               c.reward.weights = reward_preset(*c.reward.preset);
               named_preset = true;
             }},
            {"weights",
             [&](const auto& n, const auto& k) {
               weights_node = n;
               explicit_weights = true;
               RewardWeights w{0, 0, 0, 0};
               dispatch(r, n, k,
                        {{"w_r", [&](const auto& m, const auto& kk) { w.reach = r.real(m, kk); }},
                         {"w_s", [&](const auto& m, const auto& kk) { w.safety = r.real(m, kk); }},
                         {"w_j", [&](const auto& m, const auto& kk) { w.jerk = r.real(m, kk); }},
                         {"w_p", [&](const auto& m, const auto& kk) { w.proximity = r.real(m, kk); }}});
               c.reward.weights = w;
             }},
            {"contact_bonus", [&](const auto& n, const auto& k) { c.reward.contact_bonus = r.real(n, k); }}});
  if (explicit_weights) {
    if (named_preset) r.fail(weights_node, "reward: give either preset or weights, not both");
    c.reward.preset.reset();
  }

  auto& a = c.agent;
  dispatch(r, root["agent"], "agent",
           {{"gamma", [&](const auto& n, const auto& k) { a.gamma = r.real(n, k); }},
            {"lr_actor", [&](const auto& n, const auto& k) { a.lr_actor = r.real(n, k); }},
            {"lr_critic", [&](const auto& n, const auto& k) { a.lr_critic = r.real(n, k); }},
            {"batch_size", [&](const auto& n, const auto& k) { a.batch_size = static_cast<int>(r.integer(n, k)); }},
            {"tau_polyak", [&](const auto& n, const auto& k) { a.tau_polyak = r.real(n, k); }},
            {"buffer_capacity", [&](const auto& n, const auto& k) { a.buffer_capacity = r.unsigned_int(n, k); }},
            {"updates_per_step", [&](const auto& n, const auto& k) { a.updates_per_step = static_cast<int>(r.integer(n, k)); }},
            {"hidden_layers",
             [&](const auto& n, const auto& k) {
               a.hidden_layers.clear();
               r.sequence(n, k, [&](const auto& m, const auto& kk) { a.hidden_layers.push_back(static_cast<int>(r.integer(m, kk))); });
             }},
            {"seeds",
             [&](const auto& n, const auto& k) {
               a.seeds.clear();
               r.sequence(n, k, [&](const auto& m, const auto& kk) { a.seeds.push_back(r.unsigned_int(m, kk)); });
             }},
            {"total_env_steps", [&](const auto& n, const auto& k) { a.total_env_steps = r.integer(n, k); }},
            {"learning_starts", [&](const auto& n, const auto& k) { a.learning_starts = static_cast<int>(r.integer(n, k)); }},
            {"entropy",
             [&](const auto& n, const auto& k) {
               if (n.IsScalar() && n.Scalar() == "auto")
                 a.fixed_temperature.reset();
               else
                 a.fixed_temperature = r.real(n, k);
             }},
            {"init_temperature", [&](const auto& n, const auto& k) { a.init_temperature = r.real(n, k); }},
            {"target_entropy", [&](const auto& n, const auto& k) { a.target_entropy = r.real(n, k); }},
            {"checkpoint_every", [&](const auto& n, const auto& k) { a.checkpoint_every = r.integer(n, k); }}});

  auto& m = c.cem;
  dispatch(r, root["cem"], "cem",
           {{"iterations", [&](const auto& n, const auto& k) { m.iterations = static_cast<int>(r.integer(n, k)); }},
            {"population", [&](const auto& n, const auto& k) { m.population = static_cast<int>(r.integer(n, k)); }},
            {"elite_fraction", [&](const auto& n, const auto& k) { m.elite_fraction = r.real(n, k); }},
            {"init_std", [&](const auto& n, const auto& k) { m.init_std = r.real(n, k); }},
            {"min_std", [&](const auto& n, const auto& k) { m.min_std = r.real(n, k); }},
            {"episodes_per_candidate",
             [&](const auto& n, const auto& k) { m.episodes_per_candidate = static_cast<int>(r.integer(n, k)); }}});

  auto& s = c.shield;
  dispatch(r, root["shield"], "shield",
           {{"enabled", [&](const auto& n, const auto& k) { s.enabled = r.boolean(n, k); }},
            {"m", [&](const auto& n, const auto& k) { s.cfg.mass = r.real(n, k); }},
            {"E_max", [&](const auto& n, const auto& k) { s.cfg.energy_budget = r.real(n, k); }},
            {"f_c", [&](const auto& n, const auto& k) { s.cfg.cutoff_hz = r.real(n, k); }},
            {"alpha_h", [&](const auto& n, const auto& k) { s.cfg.barrier_gain = r.real(n, k); }},
            {"profile",
             [&](const auto& n, const auto& k) {
               try {
                 s.profile = parse_shield_profile(r.text(n, k));
               } catch (const std::invalid_argument&) {
                 r.fail(n, k + ": expected sim or hardware");
               }
             }},
            {"qp_mode", [&](const auto& n, const auto& k) { s.qp_mode = r.boolean(n, k); }},
            {"lambda", [&](const auto& n, const auto& k) { s.clf.decay_rate = r.real(n, k); }},
            {"rho", [&](const auto& n, const auto& k) { s.clf.slack_weight = r.real(n, k); }}});

  auto& v = c.eval;
  dispatch(r, root["eval"], "eval",
           {{"n_episodes", [&](const auto& n, const auto& k) { v.n_episodes = r.unsigned_int(n, k); }},
            {"mode", [&](const auto& n, const auto& k) { v.mode = parse_mode(r, n, k); }},
            {"seed0", [&](const auto& n, const auto& k) { v.seed0 = r.unsigned_int(n, k); }},
            {"presets",
             [&](const auto& n, const auto& k) {
               v.presets.clear();
               r.sequence(n, k, [&](const auto& p, const auto& kk) { v.presets.push_back(check_preset(r, p, kk)); });
             }},
            {"checkpoints", [&](const auto& n, const auto& k) { v.checkpoints = r.text(n, k); }},
            {"checkpoint_seed", [&](const auto& n, const auto& k) { v.checkpoint_seed = r.unsigned_int(n, k); }},
            {"compare_episodes", [&](const auto& n, const auto& k) { v.compare_episodes = r.unsigned_int(n, k); }},
            {"compare_mode", [&](const auto& n, const auto& k) { v.compare_mode = parse_mode(r, n, k); }}});

  if (c.impact_gain_calibrated)
    e.impact_gain = calibrated_impact_gain(e.force_limit, s.cfg.mass, s.cfg.energy_budget);
  s.cfg.dt = s.profile == ShieldProfile::kHardware ? kHardwareControlPeriod : e.dt;
  c.cem.contact_bonus = c.reward.contact_bonus;
  return c;
}

std::string fmt(double v) { return format_double(v); }

template <typename T>
std::string flow(const std::vector<T>& xs) {
  std::string o = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) o += ", ";
    if constexpr (std::is_same_v<T, std::string>)
      o += xs[i];
    else
      o += std::to_string(xs[i]);
  }
  return o + "]";
}

std::string quote(const std::string& s) {
  std::string o = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') o += '\\';
    o += ch;
  }
  return o + "\"";
}

}  // namespace

void RunConfig::validate() const {
  auto wrap = [](const std::string& section, const auto& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(section + ": " + ex.what());
    }
  };
  if (workers < 1) throw ConfigError("run.workers: must be >= 1");
  if (name.empty()) throw ConfigError("run.name: must not be empty");
  wrap("env", [&] { env.validate(); });
  wrap("agent", [&] { agent.validate(); });
  if (agent.seeds.empty()) throw ConfigError("agent.seeds: must not be empty");
  if (trainer == TrainerKind::kCem) wrap("cem", [&] { cem.validate(); });
  wrap("shield", [&] { shield.cfg.validate(); });
  if (shield.qp_mode) wrap("shield", [&] { shield.clf.validate(); });
  for (double w : {reward.weights.reach, reward.weights.safety, reward.weights.jerk, reward.weights.proximity})
    if (!std::isfinite(w)) throw ConfigError("reward.weights: must be finite");
  if (!std::isfinite(reward.contact_bonus)) throw ConfigError("reward.contact_bonus: must be finite");
  if (eval.n_episodes < 1) throw ConfigError("eval.n_episodes: must be >= 1");
  if (eval.compare_episodes < 1) throw ConfigError("eval.compare_episodes: must be >= 1");
  if (eval.presets.empty()) throw ConfigError("eval.presets: must not be empty");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin, bool apply_env_overrides) {
  const Reader r{origin};
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(origin + ":" + std::to_string(ex.mark.line + 1) + ":" + std::to_string(ex.mark.column + 1) +
                      ": " + ex.msg);
  }
  if (apply_env_overrides) {
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (root.IsMap()) apply_overrides(root);
  }
  RunConfig cfg = from_yaml(root, r);
  try {
    cfg.validate();
  } catch (const ConfigError& ex) {
    throw ConfigError(origin + ": " + ex.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, bool apply_env_overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string(), apply_env_overrides);
}

std::string resolved_config_yaml(const RunConfig& c) {
  std::ostringstream o;
  const auto& e = c.env;
  o << "run:\n"
    << "  name: " << quote(c.name) << "\n"
    << "  out: " << quote(c.out_dir.generic_string()) << "\n"
    << "  trainer: " << (c.trainer == TrainerKind::kSac ? "sac" : "cem") << "\n"
    << "  workers: " << c.workers << "\n";
  o << "env:\n"
    << "  dt: " << fmt(e.dt) << "\n"
    << "  delta_max: " << fmt(e.delta_max) << "\n"
    << "  grasp_tol: " << fmt(e.grasp_tol) << "\n"
    << "  horizon: " << e.horizon << "\n"
    << "  hand_mass: " << fmt(e.hand_mass) << "\n"
    << "  object_mass: " << fmt(e.object_mass) << "\n"
    << "  mu_hand: " << fmt(e.mu_hand) << "\n"
    << "  mu_object: " << fmt(e.mu_object) << "\n"
    << "  F_tau: " << fmt(e.force_limit) << "\n"
    << "  k_v: " << fmt(e.impact_gain) << "\n"
    << "  workspace:\n";
  const char* axes[] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i)
    o << "    " << axes[i] << ": [" << fmt(e.workspace[i].min) << ", " << fmt(e.workspace[i].max) << "]\n";
  o << "  home: [" << fmt(e.home.x()) << ", " << fmt(e.home.y()) << ", " << fmt(e.home.z()) << "]\n";
  o << "reward:\n";
  if (c.reward.preset) {
    o << "  preset: " << *c.reward.preset << "\n";
  } else {
    const auto& w = c.reward.weights;
    o << "  weights: {w_r: " << fmt(w.reach) << ", w_s: " << fmt(w.safety) << ", w_j: " << fmt(w.jerk)
      << ", w_p: " << fmt(w.proximity) << "}\n";
  }
  o << "  contact_bonus: " << fmt(c.reward.contact_bonus) << "\n";
  const auto& a = c.agent;
  o << "agent:\n"
    << "  gamma: " << fmt(a.gamma) << "\n"
    << "  lr_actor: " << fmt(a.lr_actor) << "\n"
    << "  lr_critic: " << fmt(a.lr_critic) << "\n"
    << "  batch_size: " << a.batch_size << "\n"
    << "  tau_polyak: " << fmt(a.tau_polyak) << "\n"
    << "  buffer_capacity: " << a.buffer_capacity << "\n"
    << "  updates_per_step: " << a.updates_per_step << "\n"
    << "  hidden_layers: " << flow(a.hidden_layers) << "\n"
    << "  seeds: " << flow(a.seeds) << "\n"
    << "  total_env_steps: " << a.total_env_steps << "\n"
    << "  learning_starts: " << a.learning_starts << "\n"
    << "  entropy: " << (a.fixed_temperature ? fmt(*a.fixed_temperature) : std::string("auto")) << "\n"
    << "  init_temperature: " << fmt(a.init_temperature) << "\n"
    << "  target_entropy: " << fmt(a.target_entropy) << "\n"
    << "  checkpoint_every: " << a.checkpoint_every << "\n";
  const auto& m = c.cem;
  o << "cem:\n"
    << "  iterations: " << m.iterations << "\n"
    << "  population: " << m.population << "\n"
    << "  elite_fraction: " << fmt(m.elite_fraction) << "\n"
    << "  init_std: " << fmt(m.init_std) << "\n"
    << "  min_std: " << fmt(m.min_std) << "\n"
    << "  episodes_per_candidate: " << m.episodes_per_candidate << "\n";
  const auto& s = c.shield;
  o << "shield:\n"
    << "  enabled: " << (s.enabled ? "true" : "false") << "\n"
    << "  m: " << fmt(s.cfg.mass) << "\n"
    << "  E_max: " << fmt(s.cfg.energy_budget) << "\n"
    << "  f_c: " << fmt(s.cfg.cutoff_hz) << "\n"
    << "  alpha_h: " << fmt(s.cfg.barrier_gain) << "\n"
    << "  profile: " << to_string(s.profile) << "\n"
    << "  qp_mode: " << (s.qp_mode ? "true" : "false") << "\n"
    << "  lambda: " << fmt(s.clf.decay_rate) << "\n"
    << "  rho: " << fmt(s.clf.slack_weight) << "\n";
  const auto& v = c.eval;
  o << "eval:\n"
    << "  n_episodes: " << v.n_episodes << "\n"
    << "  mode: " << to_string(v.mode) << "\n"
    << "  seed0: " << v.seed0 << "\n"
    << "  presets: " << flow(v.presets) << "\n"
    << "  checkpoints: " << quote(v.checkpoints) << "\n"
    << "  checkpoint_seed: " << v.checkpoint_seed << "\n"
    << "  compare_episodes: " << v.compare_episodes << "\n"
    << "  compare_mode: " << to_string(v.compare_mode) << "\n";
  return o.str();
}

ShieldConfig effective_shield(const RunConfig& cfg) {
  ShieldConfig s = cfg.shield.cfg;
  s.dt = cfg.shield.profile == ShieldProfile::kHardware ? kHardwareControlPeriod : cfg.env.dt;
  return s;
}

RewardWeights effective_weights(const RunConfig& cfg) {
  return cfg.reward.preset ? reward_preset(*cfg.reward.preset) : cfg.reward.weights;
}

std::filesystem::path expand_checkpoint_template(const std::string& tmpl, const std::string& preset,
                                                 std::uint64_t seed) {
  std::string out = tmpl;
  auto replace_all = [&](const std::string& from, const std::string& to) {
    for (std::size_t pos = out.find(from); pos != std::string::npos; pos = out.find(from, pos + to.size()))
      out.replace(pos, from.size(), to);
  };
  replace_all("{preset}", preset);
  replace_all("{seed}", std::to_string(seed));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : parse_name_list(text)) {
    const auto dash = item.find('-');
    try {
      std::size_t used = 0;
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        const std::string lo_s = item.substr(0, dash), hi_s = item.substr(dash + 1);
        std::size_t u1 = 0, u2 = 0;
        const auto lo = std::stoull(lo_s, &u1), hi = std::stoull(hi_s, &u2);
        if (u1 != lo_s.size() || u2 != hi_s.size() || hi < lo) throw std::invalid_argument(item);
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("invalid seed list entry '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace safecontact
