#include "safecontact/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "safecontact/svg.hpp"
#include "safecontact/trace_io.hpp"

namespace safecontact {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

// Per-step envelope over the episodes still running at that step.
void envelope(const std::vector<EpisodeTrace>& traces, bool use_ke, std::vector<double>& mx,
              std::vector<double>& mean) {
  std::size_t len = 0;
  for (const auto& t : traces) len = std::max(len, t.kinetic_energy.size());
  mx.assign(len, 0.0);
  mean.assign(len, 0.0);
  std::vector<std::size_t> count(len, 0);
  for (const auto& t : traces) {
    const auto& s = use_ke ? t.kinetic_energy : t.speed;
    for (std::size_t k = 0; k < s.size(); ++k) {
      mx[k] = std::max(mx[k], s[k]);
      mean[k] += s[k];
      ++count[k];
    }
  }
  for (std::size_t k = 0; k < len; ++k) mean[k] /= static_cast<double>(count[k]);
}

std::vector<double> contact_forces(const std::vector<EpisodeTrace>& traces) {
  std::vector<double> f;
  for (const auto& t : traces)
    if (t.success) f.push_back(t.f_contact);
  return f;
}

Json condition_json(const ConditionReport& c) {
  Json j;
  j["metrics"] = metrics_to_json(c.metrics);
  j["exceed_steps"] = c.exceed_steps;
  j["exceed_episodes"] = c.exceed_episodes;
  j["max_ke"] = number(c.max_ke);
  j["max_speed"] = number(c.max_speed);
  j["interventions"] = c.interventions;
  return j;
}

}  // namespace

Json metrics_to_json(const Metrics& m) {
  Json j;
  j["episodes"] = m.episodes;
  j["successes"] = m.successes;
  j["contacts"] = m.contacts;
  j["success_rate"] = number(m.success_rate);
  j["T_mean"] = number(m.T_mean);
  j["T_std"] = number(m.T_std);
  j["F_mean"] = number(m.F_mean);
  j["F_std"] = number(m.F_std);
  j["F_max"] = number(m.F_max);
  j["F_median"] = number(m.F_median);
  j["violations"] = m.violations;
  j["sv_rate"] = number(m.sv_rate);
  j["sv_rate_all"] = number(m.sv_rate_all);
  j["rms_jerk_mean"] = number(m.rms_jerk_mean);
  j["rms_jerk_std"] = number(m.rms_jerk_std);
  j["return_mean"] = number(m.return_mean);
  j["return_std"] = number(m.return_std);
  return j;
}

Json summary_json(const ReportInputs& in) {
  Json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["dt"] = in.dt;
  j["force_limit"] = in.force_limit;
  j["energy_budget"] = in.energy_budget;
  Json groups = Json::array();
  for (const auto& g : in.groups) {
    Json row;
    row["label"] = g.label;
    row["metrics"] = metrics_to_json(compute_metrics(g.traces, in.dt));
    groups.push_back(std::move(row));
  }
  j["groups"] = std::move(groups);
  Json failures = Json::array();
  for (const auto& [label, err] : in.failures) failures.push_back(Json{{"label", label}, {"error", err}});
  j["failures"] = std::move(failures);
  return j;
}

std::string metrics_table_csv(const ReportInputs& in) {
  std::ostringstream os;
  os << "label,episodes,success_rate,T_mean,T_std,F_mean,F_std,F_max,F_median,violations,sv_rate,sv_rate_all,"
        "rms_jerk_mean,rms_jerk_std,return_mean,return_std\n";
  for (const auto& g : in.groups) {
    const Metrics m = compute_metrics(g.traces, in.dt);
    os << g.label << ',' << m.episodes << ',' << cell(m.success_rate) << ',' << cell(m.T_mean) << ','
       << cell(m.T_std) << ',' << cell(m.F_mean) << ',' << cell(m.F_std) << ',' << cell(m.F_max) << ','
       << cell(m.F_median) << ',' << m.violations << ',' << cell(m.sv_rate) << ',' << cell(m.sv_rate_all) << ','
       << cell(m.rms_jerk_mean) << ',' << cell(m.rms_jerk_std) << ',' << cell(m.return_mean) << ','
       << cell(m.return_std) << '\n';
  }
  return os.str();
}

std::string episodes_csv(const ReportGroup& group, double dt) {
  std::ostringstream os;
  os << "seed,steps,T,success,violation,f_contact,ke_contact,rms_jerk,return\n";
  for (const auto& t : group.traces) {
    const auto v = velocity_series(t);
    const double jerk = v.size() >= 3 ? rms_jerk(v, dt) : std::nan("");
    os << t.seed << ',' << t.steps << ',' << format_double(t.steps * dt) << ',' << int(t.success) << ','
       << int(t.violation) << ',' << format_double(t.f_contact) << ',' << format_double(t.ke_contact) << ','
       << cell(jerk) << ',' << format_double(t.episode_return) << '\n';
  }
  return os.str();
}

void emit_report(const ReportInputs& in, const std::filesystem::path& out_dir) {
  if (in.groups.empty()) throw std::invalid_argument("report: empty trace set");
  for (const auto& g : in.groups)
    if (g.traces.empty()) throw std::invalid_argument("report: group '" + g.label + "' has no traces");

  // Render everything first so a failure leaves no partial output.
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("summary.json", summary_json(in).dump(2) + "\n");
  files.emplace_back("table.csv", metrics_table_csv(in));
  for (const auto& g : in.groups) files.emplace_back(g.label + "_episodes.csv", episodes_csv(g, in.dt));

  std::vector<svg::Series> forces, ke_env, spd_env;
  std::vector<std::string> labels;
  std::vector<double> sv;
  for (const auto& g : in.groups) {
    forces.push_back({g.label, contact_forces(g.traces)});
    std::vector<double> mx, mean;
    envelope(g.traces, true, mx, mean);
    ke_env.push_back({g.label + " max", mx});
    envelope(g.traces, false, mx, mean);
    spd_env.push_back({g.label + " max", mx});
    labels.push_back(g.label);
    const Metrics m = compute_metrics(g.traces, in.dt);
    sv.push_back(std::isfinite(m.sv_rate) ? m.sv_rate : 0.0);
  }
  files.emplace_back("force_histogram.svg",
                     svg::histogram("Contact force", forces, 25, "F_N [N]", in.force_limit));
  files.emplace_back("ke_envelope.svg", svg::line_chart("Kinetic energy envelope", ke_env, "step", "KE [J]",
                                                        in.energy_budget));
  files.emplace_back("speed_envelope.svg", svg::line_chart("Speed envelope", spd_env, "step", "speed [m/s]"));
  files.emplace_back("violation_rate.svg", svg::bar_chart("Violation rate", labels, sv, "SV rate [%]"));

  std::filesystem::create_directories(out_dir);
  for (const auto& [name, text] : files) write_text_atomic(out_dir / name, text);
}

Json shield_comparison_json(const ShieldComparison& cmp) {
  Json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["n"] = cmp.n;
  j["energy_budget"] = cmp.energy_budget;
  j["unshielded"] = condition_json(cmp.unshielded);
  j["shielded"] = condition_json(cmp.shielded);
  j["completion_time_delta"] = number(cmp.completion_time_delta);
  return j;
}

void emit_shield_report(const ShieldComparison& cmp, const std::filesystem::path& out_dir) {
  const auto& u = cmp.unshielded;
  const auto& s = cmp.shielded;
  std::ostringstream os;
  os << "step,ke_max_unshielded,ke_mean_unshielded,ke_max_shielded,ke_mean_shielded,"
        "speed_max_unshielded,speed_mean_unshielded,speed_max_shielded,speed_mean_shielded\n";
  const std::size_t len = std::max(u.ke_max.size(), s.ke_max.size());
  auto at = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? format_double(v[k]) : ""; };
  for (std::size_t k = 0; k < len; ++k) {
    os << k << ',' << at(u.ke_max, k) << ',' << at(u.ke_mean, k) << ',' << at(s.ke_max, k) << ','
       << at(s.ke_mean, k) << ',' << at(u.speed_max, k) << ',' << at(u.speed_mean, k) << ','
       << at(s.speed_max, k) << ',' << at(s.speed_mean, k) << '\n';
  }
  const std::string ke_svg =
      svg::line_chart("Kinetic energy envelope", {{"unshielded max", u.ke_max}, {"shielded max", s.ke_max}},
                      "step", "KE [J]", cmp.energy_budget);
  const std::string spd_svg = svg::line_chart(
      "Speed envelope", {{"unshielded max", u.speed_max}, {"shielded max", s.speed_max}}, "step", "speed [m/s]");
  std::filesystem::create_directories(out_dir);
  write_text_atomic(out_dir / "report.json", shield_comparison_json(cmp).dump(2) + "\n");
  write_text_atomic(out_dir / "envelopes.csv", os.str());
  write_text_atomic(out_dir / "ke_envelope.svg", ke_svg);
  write_text_atomic(out_dir / "speed_envelope.svg", spd_svg);
}

}  // namespace safecontact
