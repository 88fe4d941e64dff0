#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "safecontact/rollout.hpp"

namespace safecontact {

/// Header of the per-episode trace CSV. The last three columns carry the
/// executed velocity; the terminal row starts with "#END".
inline constexpr const char* kTraceHeader =
    "t,d,ke,spd,ax_raw,ay_raw,az_raw,ax_safe,ay_safe,az_safe,intervened,vx,vy,vz";

/// Shortest-exact text for a double (17 significant digits).
std::string format_double(double v);

std::string trace_to_csv(const EpisodeTrace& trace);

/// Written to a temporary name and renamed, so a crash never leaves a
/// half-written trace behind.
void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path);

EpisodeTrace read_trace_csv(const std::filesystem::path& path);

/// Every ep_*.csv in `dir`, sorted by name.
std::vector<EpisodeTrace> read_trace_dir(const std::filesystem::path& dir);

void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace safecontact
