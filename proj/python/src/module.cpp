#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "safecontact/commands.hpp"
#include "safecontact/config.hpp"
#include "safecontact/metrics.hpp"
#include "safecontact/policy_io.hpp"
#include "safecontact/report.hpp"
#include "safecontact/rollout.hpp"
#include "safecontact/shield.hpp"

namespace py = pybind11;
using namespace safecontact;

namespace {

RunConfig config_or_default(const std::optional<std::string>& path) {
  return path ? load_run_config(*path) : parse_run_config("{}", "<defaults>");
}

py::dict state_dict(const EnvState& s) {
  py::dict d;
  d["ee_pos"] = s.ee_pos;
  d["hand_pos"] = s.hand_pos;
  d["ee_vel"] = s.ee_vel;
  d["step"] = s.step_index;
  d["observation"] = Eigen::VectorXd(s.observation());
  return d;
}

EnvState state_from(const py::dict& d) {
  EnvState s;
  s.ee_pos = d["ee_pos"].cast<Vec3>();
  s.hand_pos = d["hand_pos"].cast<Vec3>();
  s.ee_vel = d["ee_vel"].cast<Vec3>();
  s.step_index = d["step"].cast<int>();
  return s;
}

// Parsed through nlohmann so Python sees plain dicts.
py::object to_python(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::unique_ptr<Policy> make_policy(const std::string& which, double delta_max) {
  if (which == "overspeed") return std::make_unique<OverspeedPolicy>(delta_max);
  if (which == "zero") return std::make_unique<ZeroPolicy>();
  return std::make_unique<MlpPolicy>(load_policy(which));
}

py::dict trace_dict(const EpisodeTrace& tr) {
  py::dict d;
  d["seed"] = tr.seed;
  d["steps"] = tr.steps;
  d["success"] = tr.success;
  d["violation"] = tr.violation;
  d["f_contact"] = tr.f_contact;
  d["ke_contact"] = tr.ke_contact;
  d["return"] = tr.episode_return;
  d["kinetic_energy"] = tr.kinetic_energy;
  d["speed"] = tr.speed;
  d["distance"] = tr.distance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Safe-contact reaching: environment, reward, shield, rollouts and the command-line operations.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);

  m.def("calibrated_impact_gain", &calibrated_impact_gain, py::arg("force_limit") = 50.0, py::arg("mass") = 0.93,
        py::arg("energy_budget") = 0.30);

  m.def(
      "reward_preset",
      [](const std::string& name) {
        const RewardWeights w = reward_preset(name);
        return py::dict(py::arg("reach") = w.reach, py::arg("safety") = w.safety, py::arg("jerk") = w.jerk,
                        py::arg("proximity") = w.proximity);
      },
      py::arg("name"));

  m.def(
      "total_reward",
      [](const Vec3& ee_pos, const Vec3& hand_pos, bool contact, double normal_force, const Vec3& delta,
         const Vec3& delta_prev, const std::string& preset, double contact_bonus) {
        RewardContext c;
        c.ee_pos = ee_pos;
        c.hand_pos = hand_pos;
        c.contact = contact;
        c.normal_force = normal_force;
        c.delta = delta;
        c.delta_prev = delta_prev;
        c.contact_bonus = contact_bonus;
        return total_reward(c, reward_preset(preset));
      },
      py::arg("ee_pos"), py::arg("hand_pos"), py::arg("contact") = false, py::arg("normal_force") = 0.0,
      py::arg("delta") = Vec3::Zero(), py::arg("delta_prev") = Vec3::Zero(), py::arg("preset") = "RF5",
      py::arg("contact_bonus") = 500.0);

  m.def(
      "lpf_coefficient",
      [](double cutoff_hz, double dt) {
        ShieldConfig c;
        c.cutoff_hz = cutoff_hz;
        c.dt = dt;
        c.validate();
        return c.lpf_coefficient();
      },
      py::arg("cutoff_hz") = 25.0, py::arg("dt") = 1.0 / 60.0);

  m.def(
      "ke_project",
      [](const Vec3& v, double mass, double energy_budget) {
        ShieldConfig c;
        c.mass = mass;
        c.energy_budget = energy_budget;
        c.validate();
        return ke_project(v, c);
      },
      py::arg("v"), py::arg("mass") = 0.93, py::arg("energy_budget") = 0.30);

  m.def(
      "shield_commands",
      [](const Eigen::MatrixX3d& raw, double mass, double energy_budget, double cutoff_hz, double dt) {
        ShieldConfig c;
        c.mass = mass;
        c.energy_budget = energy_budget;
        c.cutoff_hz = cutoff_hz;
        c.dt = dt;
        c.validate();
        Eigen::MatrixX3d filtered(raw.rows(), 3), safe(raw.rows(), 3);
        std::vector<bool> hit(static_cast<std::size_t>(raw.rows()));
        LpfState s = raw.rows() ? LpfState::primed(raw.row(0).transpose()) : LpfState{};
        for (Eigen::Index k = 0; k < raw.rows(); ++k) {
          const ShieldStep st = shield_pipeline(s, raw.row(k).transpose(), c);
          s = st.state;
          filtered.row(k) = st.v_filtered.transpose();
          safe.row(k) = st.v_safe.transpose();
          hit[static_cast<std::size_t>(k)] = st.intervened;
        }
        return py::make_tuple(filtered, safe, hit);
      },
      py::arg("raw"), py::arg("mass") = 0.93, py::arg("energy_budget") = 0.30, py::arg("cutoff_hz") = 25.0,
      py::arg("dt") = 1.0 / 60.0,
      "Runs an (N, 3) velocity command sequence through the low-pass filter and the energy projection, "
      "priming the filter with the first command. Returns (filtered, safe, intervened).");

  py::class_<Env>(m, "Env")
      .def(py::init([](const std::optional<std::string>& config) { return Env(config_or_default(config).env); }),
           py::arg("config") = py::none())
      .def("reset", [](const Env& e, std::uint64_t seed) { return state_dict(e.reset(seed)); }, py::arg("seed"))
      .def(
          "step",
          [](const Env& e, const py::dict& state, const Vec3& delta) {
            const StepResult r = e.step(state_from(state), delta);
            py::dict out;
            out["state"] = state_dict(r.state);
            out["done"] = r.done;
            out["truncated"] = r.truncated;
            out["contact"] = r.contact.has_value();
            out["normal_force"] = r.contact ? r.contact->normal_force : 0.0;
            out["violation"] = r.contact && r.contact->violation;
            out["executed_delta"] = r.executed_delta;
            return out;
          },
          py::arg("state"), py::arg("delta"))
      .def_property_readonly("impact_gain", [](const Env& e) { return e.config().impact_gain; })
      .def_property_readonly("horizon", [](const Env& e) { return e.config().horizon; })
      .def_property_readonly("delta_max", [](const Env& e) { return e.config().delta_max; });

  m.def(
      "rollouts",
      [](const std::string& policy, std::size_t episodes, std::uint64_t seed0, bool shield, bool stochastic,
         const std::optional<std::string>& config, int workers) {
        const RunConfig cfg = config_or_default(config);
        const auto p = make_policy(policy, cfg.env.delta_max);
        RolloutSpec spec;
        spec.shield = effective_shield(cfg);
        spec.shield_enabled = shield;
        spec.mode = stochastic ? ActionMode::kStochastic : ActionMode::kDeterministic;
        spec.reward = effective_weights(cfg);
        spec.contact_bonus = cfg.reward.contact_bonus;
        if (shield && cfg.shield.qp_mode) spec.qp = cfg.shield.clf;
        BatchOptions opts;
        opts.workers = workers;
        std::vector<EpisodeTrace> traces;
        {
          py::gil_scoped_release release;
          traces = batch_rollout(*p, cfg.env, spec, episodes, seed0, opts);
        }
        py::list eps;
        for (const auto& tr : traces) eps.append(trace_dict(tr));
        return py::make_tuple(to_python(metrics_to_json(compute_metrics(traces, cfg.env.dt))), eps);
      },
      py::arg("policy") = "overspeed", py::arg("episodes") = 100, py::arg("seed0") = 1000000,
      py::arg("shield") = true, py::arg("stochastic") = true, py::arg("config") = py::none(), py::arg("workers") = 1,
      "Rolls out `policy` ('overspeed', 'zero' or a checkpoint path). Returns (metrics, episodes).");

  m.def(
      "resolved_config",
      [](const std::optional<std::string>& path) { return resolved_config_yaml(config_or_default(path)); },
      py::arg("path") = py::none());

  m.def(
      "run_command",
      [](const std::string& name, const std::string& config, const std::optional<std::string>& out,
         const std::optional<std::string>& seeds, const std::optional<std::size_t>& episodes,
         const std::optional<bool>& shield, const std::optional<std::string>& preset, const std::optional<int>& workers,
         const std::optional<std::string>& checkpoint, const std::optional<std::string>& trace, bool train_missing) {
        CommandOptions o;
        o.config = config;
        if (out) o.out = *out;
        o.seeds = seeds;
        o.episodes = episodes;
        o.shield = shield;
        o.preset = preset;
        o.workers = workers;
        o.checkpoint = checkpoint;
        if (trace) o.trace = *trace;
        o.train_missing = train_missing;
        std::ostringstream log, err;
        int rc = 0;
        {
          py::gil_scoped_release release;
          rc = safecontact::run_command(name, o, log, err);
        }
        return py::make_tuple(rc, log.str(), err.str());
      },
      py::arg("name"), py::arg("config"), py::kw_only(), py::arg("out") = py::none(), py::arg("seeds") = py::none(),
      py::arg("episodes") = py::none(), py::arg("shield") = py::none(), py::arg("preset") = py::none(),
      py::arg("workers") = py::none(), py::arg("checkpoint") = py::none(), py::arg("trace") = py::none(),
      py::arg("train_missing") = false,
      "Runs a command-line operation in process. Returns (exit_code, log, errors).");

  m.attr("SUMMARY_SCHEMA_VERSION") = kSummarySchemaVersion;
}
