#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "safecontact/experiments.hpp"
#include "safecontact/metrics.hpp"
#include "safecontact/rollout.hpp"
#include "safecontact/trace_io.hpp"
#include "test_util.hpp"

using namespace safecontact;

namespace {

class ThrowingPolicy final : public Policy {
 public:
  Vec3 act(const Observation&, ActionMode, Rng&) const override { throw NumericError("boom"); }
};

RolloutSpec overspeed_spec(bool shielded) {
  RolloutSpec spec;
  spec.shield_enabled = shielded;
  spec.mode = ActionMode::kStochastic;
  return spec;
}

// Synthetic traces with every field drawn at random.
std::vector<EpisodeTrace> synthetic(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EpisodeTrace> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    EpisodeTrace& tr = out[k];
    tr.seed = k;
    tr.steps = 1 + static_cast<int>(u(rng) * 150);
    for (int t = 0; t < tr.steps; ++t) tr.velocity.emplace_back(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
    tr.success = u(rng) < 0.6;
    tr.f_contact = tr.success ? 80.0 * u(rng) : 0.0;
    tr.violation = tr.success && tr.f_contact > 50.0;
    tr.episode_return = 100.0 * (u(rng) - 0.5);
  }
  return out;
}

double jerk_oracle(const std::vector<Vec3>& v_exec, double dt) {
  std::vector<Vec3> v{Vec3::Zero()};
  v.insert(v.end(), v_exec.begin(), v_exec.end());
  double s = 0.0;
  for (std::size_t t = 2; t < v.size(); ++t) s += ((v[t] - 2.0 * v[t - 1] + v[t - 2]) / (dt * dt)).squaredNorm();
  return std::sqrt(s / static_cast<double>(v.size() - 2));
}

}  // namespace

TEST_SUITE("rollout") {

TEST_CASE("a policy that never moves runs to the horizon") {
  const Env env{EnvConfig{}};
  const EpisodeTrace tr = run_episode(ZeroPolicy{}, env, RolloutSpec{}, 5);
  CHECK(tr.steps == 150);
  CHECK_FALSE(tr.success);
  CHECK(tr.f_contact == 0.0);
  CHECK(tr.distance.size() == 150);
  CHECK(*std::max_element(tr.kinetic_energy.begin(), tr.kinetic_energy.end()) == 0.0);
}

TEST_CASE("shielded overspeed commands stay inside the energy budget") {
  const Env env{EnvConfig{}};
  const OverspeedPolicy policy(0.02);
  double worst_shielded = 0.0, worst_raw = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const EpisodeTrace a = run_episode(policy, env, overspeed_spec(true), seed);
    const EpisodeTrace b = run_episode(policy, env, overspeed_spec(false), seed);
    worst_shielded = std::max(worst_shielded, *std::max_element(a.kinetic_energy.begin(), a.kinetic_energy.end()));
    worst_raw = std::max(worst_raw, *std::max_element(b.kinetic_energy.begin(), b.kinetic_energy.end()));
    for (std::size_t t = 0; t < a.command_safe.size(); ++t) {
      REQUIRE(0.5 * 0.93 * a.command_safe[t].squaredNorm() <= 0.30 + 1e-12);
      REQUIRE(a.speed[t] == doctest::Approx(a.velocity[t].norm()));
    }
    for (std::size_t t = 0; t < b.command_safe.size(); ++t) REQUIRE(b.command_safe[t] == b.command_raw[t]);
  }
  CHECK(worst_shielded <= 0.30 + kEnergyTolerance);
  CHECK(worst_raw > 0.30);
}

TEST_CASE("QP mode keeps the energy bound") {
  const Env env{EnvConfig{}};
  RolloutSpec spec = overspeed_spec(true);
  spec.qp = ClfConfig{};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EpisodeTrace tr = run_episode(OverspeedPolicy(0.02), env, spec, seed);
    CHECK(*std::max_element(tr.kinetic_energy.begin(), tr.kinetic_energy.end()) <= 0.30 + kEnergyTolerance);
  }
}

TEST_CASE("terminal record follows the contact") {
  const Env env{EnvConfig{}};
  const EpisodeTrace tr = run_episode(OverspeedPolicy(0.02, 0.0), env, RolloutSpec{}, 11);
  REQUIRE(tr.success);
  CHECK(tr.f_contact > 0.0);
  CHECK(tr.steps == static_cast<int>(tr.distance.size()));
  CHECK(tr.ke_contact == tr.kinetic_energy[tr.kinetic_energy.size() - 2]);
  CHECK(tr.violation == (tr.f_contact > 50.0));
}

TEST_CASE("batches are deterministic and independent of the worker count") {
  testutil::TempDir dir;
  const EnvConfig cfg;
  const OverspeedPolicy policy(0.02);
  BatchOptions one;
  one.trace_dir = dir / "one";
  BatchOptions four;
  four.workers = 4;
  four.trace_dir = dir / "four";
  const auto a = batch_rollout(policy, cfg, overspeed_spec(true), 24, 100, one);
  const auto b = batch_rollout(policy, cfg, overspeed_spec(true), 24, 100, four);
  REQUIRE(a.size() == 24);
  REQUIRE(b.size() == 24);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].seed == 100 + i);
    CHECK(trace_to_csv(a[i]) == trace_to_csv(b[i]));
    CHECK(testutil::slurp(trace_file_name(dir / "one", 100 + i)) ==
          testutil::slurp(trace_file_name(dir / "four", 100 + i)));
  }
  const auto back = read_trace_dir(dir / "one");
  REQUIRE(back.size() == 24);
  const Metrics m1 = compute_metrics(a, cfg.dt), m2 = compute_metrics(back, cfg.dt);
  CHECK(m1.success_rate == m2.success_rate);
  CHECK(m1.F_mean == m2.F_mean);
  CHECK(m1.rms_jerk_mean == m2.rms_jerk_mean);
}

TEST_CASE("batch control and failure propagation") {
  const EnvConfig cfg;
  BatchOptions opts;
  opts.keep_going = [](std::size_t finished) { return finished < 3; };
  CHECK(batch_rollout(ZeroPolicy{}, cfg, RolloutSpec{}, 10, 0, opts).size() == 3);
  CHECK_THROWS_AS(batch_rollout(ThrowingPolicy{}, cfg, RolloutSpec{}, 4, 0), NumericError);
  CHECK_THROWS_AS(batch_rollout(ZeroPolicy{}, cfg, RolloutSpec{}, 0, 0), std::invalid_argument);
}

TEST_CASE("executed speed never exceeds the projection radius") {
  const double dt = 1.0 / 60.0, v_max = ShieldConfig{}.speed_limit();
  Rng rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    Vec3 v(n(rng), n(rng), n(rng));
    v *= v_max / v.norm();
    REQUIRE((displacement_within_limit(v, dt, v_max) / dt).norm() <= v_max);
  }
}

}

TEST_SUITE("metrics") {

TEST_CASE("rms jerk on closed-form signals") {
  const double dt = 1.0 / 60.0;
  std::vector<Vec3> ramp;
  for (int t = 0; t < 20; ++t) ramp.emplace_back(0.1 * t, -0.2 * t, 0.0);
  CHECK(rms_jerk(ramp, dt) == doctest::Approx(0.0).epsilon(1e-9));

  const std::vector<Vec3> step{Vec3::Zero(), Vec3::Zero(), Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX()};
  CHECK(rms_jerk(step, dt) == doctest::Approx(std::sqrt(2.0 / 3.0) / (dt * dt)).epsilon(1e-12));

  std::vector<Vec3> sine;
  const double w = 2.0 * M_PI;
  for (int k = 0; k < 122; ++k) sine.emplace_back(std::sin(w * k * dt), 0.0, 0.0);
  const double expect = 4.0 * std::pow(std::sin(w * dt / 2.0), 2) / (dt * dt) / std::sqrt(2.0);
  CHECK(rms_jerk(sine, dt) == doctest::Approx(expect).epsilon(1e-9));

  CHECK_THROWS_AS(rms_jerk(std::vector<Vec3>(2, Vec3::Zero()), dt), std::invalid_argument);
}

TEST_CASE("metrics match a direct computation") {
  const double dt = 1.0 / 60.0;
  const auto traces = synthetic(500, 8);
  const Metrics m = compute_metrics(traces, dt);

  std::vector<double> T, F, J, R;
  std::size_t viol = 0;
  for (const auto& tr : traces) {
    R.push_back(tr.episode_return);
    if (tr.velocity.size() >= 2) J.push_back(jerk_oracle(tr.velocity, dt));
    if (!tr.success) continue;
    T.push_back(tr.steps * dt);
    F.push_back(tr.f_contact);
    viol += tr.violation;
  }
  const auto mean = [](const std::vector<double>& x) {
    long double s = 0;
    for (double v : x) s += v;
    return static_cast<double>(s / x.size());
  };
  const auto pstd = [&](const std::vector<double>& x) {
    const double mu = mean(x);
    long double s = 0;
    for (double v : x) s += (v - mu) * (v - mu);
    return std::sqrt(static_cast<double>(s / x.size()));
  };
  std::vector<double> Fs = F;
  std::sort(Fs.begin(), Fs.end());
  const double med = Fs.size() % 2 ? Fs[Fs.size() / 2] : 0.5 * (Fs[Fs.size() / 2 - 1] + Fs[Fs.size() / 2]);

  CHECK(m.episodes == 500);
  CHECK(m.successes == T.size());
  CHECK(m.success_rate == doctest::Approx(100.0 * T.size() / 500.0));
  CHECK(m.T_mean == doctest::Approx(mean(T)).epsilon(1e-12));
  CHECK(m.T_std == doctest::Approx(pstd(T)).epsilon(1e-10));
  CHECK(m.F_mean == doctest::Approx(mean(F)).epsilon(1e-12));
  CHECK(m.F_std == doctest::Approx(pstd(F)).epsilon(1e-10));
  CHECK(m.F_max == *std::max_element(F.begin(), F.end()));
  CHECK(m.F_median == med);
  CHECK(m.violations == viol);
  CHECK(m.sv_rate == doctest::Approx(100.0 * viol / F.size()));
  CHECK(m.sv_rate_all == doctest::Approx(100.0 * viol / 500.0));
  CHECK(m.jerk_episodes == J.size());
  CHECK(m.rms_jerk_mean == doctest::Approx(mean(J)).epsilon(1e-10));
  CHECK(m.return_mean == doctest::Approx(mean(R)).epsilon(1e-12));
  CHECK(m.return_std == doctest::Approx(pstd(R)).epsilon(1e-10));
}

TEST_CASE("metrics do not depend on episode order") {
  const double dt = 1.0 / 60.0;
  auto traces = synthetic(200, 9);
  const Metrics a = compute_metrics(traces, dt);
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(traces.begin(), traces.end(), rng);
    const Metrics b = compute_metrics(traces, dt);
    CHECK(b.successes == a.successes);
    CHECK(b.F_median == a.F_median);
    CHECK(b.F_max == a.F_max);
    CHECK(b.T_mean == doctest::Approx(a.T_mean).epsilon(1e-12));
    CHECK(b.rms_jerk_mean == doctest::Approx(a.rms_jerk_mean).epsilon(1e-12));
    CHECK(b.return_std == doctest::Approx(a.return_std).epsilon(1e-12));
  }
}

TEST_CASE("empty subsets yield NaN and empty input is rejected") {
  auto traces = synthetic(10, 3);
  for (auto& tr : traces) tr.success = false;
  const Metrics m = compute_metrics(traces, 1.0 / 60.0);
  CHECK(m.success_rate == 0.0);
  CHECK(std::isnan(m.T_mean));
  CHECK(std::isnan(m.F_median));
  CHECK(m.sv_rate == 0.0);
  CHECK_THROWS_AS(compute_metrics(std::vector<EpisodeTrace>{}, 1.0 / 60.0), std::invalid_argument);
}

}

TEST_SUITE("experiments") {

TEST_CASE("shield comparison on matched seeds") {
  testutil::TempDir dir;
  RolloutSpec base;
  base.mode = ActionMode::kStochastic;
  const ShieldComparison cmp = compare_shield(OverspeedPolicy(0.02), EnvConfig{}, base, 20, 7, 2, dir.path());
  CHECK(cmp.unshielded.traces.size() == 20);
  CHECK(cmp.shielded.traces.size() == 20);
  CHECK(cmp.shielded.exceed_steps == 0);
  CHECK(cmp.unshielded.exceed_episodes > 0);
  CHECK(cmp.shielded.max_ke <= 0.30 + kEnergyTolerance);
  CHECK(cmp.shielded.interventions > 0);
  CHECK(cmp.unshielded.interventions == 0);
  for (std::size_t i = 0; i < 20; ++i) CHECK(cmp.shielded.traces[i].seed == cmp.unshielded.traces[i].seed);
  for (const auto& tr : cmp.shielded.traces)
    for (std::size_t t = 0; t < tr.kinetic_energy.size(); ++t) REQUIRE(cmp.shielded.ke_max[t] >= tr.kinetic_energy[t]);
  CHECK(std::filesystem::exists(trace_file_name(dir / "shielded", 7)));
  CHECK(std::filesystem::exists(trace_file_name(dir / "unshielded", 26)));
}

TEST_CASE("ablation keeps going past a failing preset") {
  AblationSettings s;
  s.n_eval = 5;
  const auto rows = run_ablation({"RF1", "RF3", "RF5"},
                                 [](const std::string& p) -> PolicyParams {
                                   if (p == "RF3") throw std::runtime_error("missing checkpoint");
                                   nn::Mlp<float> net(nn::Architecture{{9, 4, 6}});
                                   return PolicyParams{net.arch(), net.params(), 0.02};
                                 },
                                 s);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ok);
  CHECK_FALSE(rows[1].ok);
  CHECK(rows[1].error == "missing checkpoint");
  CHECK(rows[2].ok);
  CHECK(rows[2].metrics.episodes == 5);
}

}

TEST_SUITE("metrics") {

TEST_CASE("violation rate is taken over contact episodes") {
  std::vector<EpisodeTrace> traces(1000);
  for (std::size_t k = 0; k < traces.size(); ++k) {
    traces[k].steps = 10;
    traces[k].velocity.assign(10, Vec3::Zero());
    traces[k].success = k % 2 == 0;
    traces[k].f_contact = traces[k].success ? 20.0 : 0.0;
  }
  traces[0].f_contact = 60.0;
  traces[0].violation = true;
  const Metrics m = compute_metrics(traces, 1.0 / 60.0);
  CHECK(m.contacts == 500);
  CHECK(m.violations == 1);
  CHECK(m.sv_rate == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(m.sv_rate_all == doctest::Approx(0.1).epsilon(1e-12));
}

}
