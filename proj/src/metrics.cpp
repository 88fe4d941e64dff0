#include "safecontact/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safecontact {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MeanStd {
  double mean = kNaN;
  double std = kNaN;
};

MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

double rms_jerk(std::span<const Vec3> v, double dt) {
  if (v.size() < 3) throw std::invalid_argument("rms_jerk: need at least three velocity samples");
  double sum = 0.0;
  Vec3 a_prev = (v[1] - v[0]) / dt;
  for (std::size_t t = 2; t < v.size(); ++t) {
    const Vec3 a = (v[t] - v[t - 1]) / dt;
    sum += ((a - a_prev) / dt).squaredNorm();
    a_prev = a;
  }
  return std::sqrt(sum / static_cast<double>(v.size() - 2));
}

std::vector<Vec3> velocity_series(const EpisodeTrace& trace) {
  std::vector<Vec3> v;
  v.reserve(trace.velocity.size() + 1);
  v.push_back(Vec3::Zero());
  v.insert(v.end(), trace.velocity.begin(), trace.velocity.end());
  return v;
}

Metrics compute_metrics(std::span<const EpisodeTrace> traces, double dt) {
  if (traces.empty()) throw std::invalid_argument("compute_metrics: empty trace list");
  Metrics m;
  m.episodes = traces.size();
  std::vector<double> times, forces, jerks, returns;
  for (const EpisodeTrace& tr : traces) {
    returns.push_back(tr.episode_return);
    if (tr.success) {
      ++m.successes;
      times.push_back(tr.steps * dt);
      ++m.contacts;
      forces.push_back(tr.f_contact);
      if (tr.violation) ++m.violations;
    }
    const auto v = velocity_series(tr);
    if (v.size() >= 3) jerks.push_back(rms_jerk(v, dt));
  }
  const double n = static_cast<double>(m.episodes);
  m.success_rate = 100.0 * static_cast<double>(m.successes) / n;
  const MeanStd t = mean_std(times);
  m.T_mean = t.mean;
  m.T_std = t.std;
  const MeanStd f = mean_std(forces);
  m.F_mean = f.mean;
  m.F_std = f.std;
  m.F_max = forces.empty() ? kNaN : *std::max_element(forces.begin(), forces.end());
  m.F_median = median(forces);
  m.sv_rate = m.contacts ? 100.0 * static_cast<double>(m.violations) / static_cast<double>(m.contacts) : 0.0;
  m.sv_rate_all = 100.0 * static_cast<double>(m.violations) / n;
  const MeanStd j = mean_std(jerks);
  m.jerk_episodes = jerks.size();
  m.rms_jerk_mean = j.mean;
  m.rms_jerk_std = j.std;
  const MeanStd r = mean_std(returns);
  m.return_mean = r.mean;
  m.return_std = r.std;
  return m;
}

}  // namespace safecontact
