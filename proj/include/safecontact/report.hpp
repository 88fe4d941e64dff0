#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "safecontact/experiments.hpp"
#include "safecontact/metrics.hpp"

namespace safecontact {

using Json = nlohmann::ordered_json;

inline constexpr int kSummarySchemaVersion = 1;

struct ReportGroup {
  std::string label;  // preset or condition name
  std::vector<EpisodeTrace> traces;
};

struct ReportInputs {
  std::vector<ReportGroup> groups;
  std::vector<std::pair<std::string, std::string>> failures;  // label, error
  double dt = 1.0 / 60.0;
  double force_limit = 50.0;
  double energy_budget = 0.30;
};

Json metrics_to_json(const Metrics& m);

Json summary_json(const ReportInputs& in);

/// CSV with one row per group.
std::string metrics_table_csv(const ReportInputs& in);

/// One row per episode of a group.
std::string episodes_csv(const ReportGroup& group, double dt);

/// Writes summary.json, table.csv, <label>_episodes.csv and the SVG plots.
/// Throws std::invalid_argument before touching the directory when any
/// group is empty or there are no groups at all.
void emit_report(const ReportInputs& in, const std::filesystem::path& out_dir);

Json shield_comparison_json(const ShieldComparison& cmp);

/// report.json, envelopes.csv and KE / speed envelope plots.
void emit_shield_report(const ShieldComparison& cmp, const std::filesystem::path& out_dir);

}  // namespace safecontact
