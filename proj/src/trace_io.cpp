#include "safecontact/trace_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace safecontact {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trace_to_csv(const EpisodeTrace& tr) {
  std::string out = kTraceHeader;
  out += '\n';
  const auto col = [&out](double v) {
    out += ',';
    out += format_double(v);
  };
  for (std::size_t t = 0; t < tr.distance.size(); ++t) {
    out += std::to_string(t);
    col(tr.distance[t]);
    col(tr.kinetic_energy[t]);
    col(tr.speed[t]);
    for (int i = 0; i < 3; ++i) col(tr.command_raw[t](i));
    for (int i = 0; i < 3; ++i) col(tr.command_safe[t](i));
    out += tr.intervened[t] ? ",1" : ",0";
    for (int i = 0; i < 3; ++i) col(tr.velocity[t](i));
    out += '\n';
  }
  out += "#END,f_contact=" + format_double(tr.f_contact) + ",ke_contact=" + format_double(tr.ke_contact) +
         ",success=" + (tr.success ? "1" : "0") + ",violation=" + (tr.violation ? "1" : "0") +
         ",steps=" + std::to_string(tr.steps) + ",return=" + format_double(tr.episode_return) +
         ",seed=" + std::to_string(tr.seed) + "\n";
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_trace_csv(const EpisodeTrace& trace, const std::filesystem::path& path) {
  write_text_atomic(path, trace_to_csv(trace));
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": malformed number '" + s + "'");
  }
}

}  // namespace

EpisodeTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error(path.string() + ": unexpected trace header");
  }
  EpisodeTrace tr;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("#END", 0) == 0) {
      for (const std::string& kv : split(line.substr(5), ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::runtime_error(path.string() + ": malformed #END field");
        const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "f_contact") tr.f_contact = to_double(v, path);
        else if (k == "ke_contact") tr.ke_contact = to_double(v, path);
        else if (k == "success") tr.success = v == "1";
        else if (k == "violation") tr.violation = v == "1";
        else if (k == "steps") tr.steps = std::stoi(v);
        else if (k == "return") tr.episode_return = to_double(v, path);
        else if (k == "seed") tr.seed = std::stoull(v);
      }
      ended = true;
      break;
    }
    const auto f = split(line, ',');
    if (f.size() != 14) throw std::runtime_error(path.string() + ": expected 14 columns, got " + std::to_string(f.size()));
    tr.distance.push_back(to_double(f[1], path));
    tr.kinetic_energy.push_back(to_double(f[2], path));
    tr.speed.push_back(to_double(f[3], path));
    tr.command_raw.emplace_back(to_double(f[4], path), to_double(f[5], path), to_double(f[6], path));
    tr.command_safe.emplace_back(to_double(f[7], path), to_double(f[8], path), to_double(f[9], path));
    tr.intervened.push_back(f[10] == "1" ? 1 : 0);
    tr.velocity.emplace_back(to_double(f[11], path), to_double(f[12], path), to_double(f[13], path));
  }
  if (!ended) throw std::runtime_error(path.string() + ": missing #END row");
  tr.command_filtered = tr.command_safe;
  return tr;
}

std::vector<EpisodeTrace> read_trace_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("ep_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<EpisodeTrace> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_trace_csv(f));
  return out;
}

}  // namespace safecontact
