#include <cmath>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "safecontact/policy.hpp"
#include "safecontact/sac.hpp"
#include "safecontact/trainer.hpp"

using namespace safecontact;
using gradcheck::RowD;

namespace {

ReplayBuffer filled_buffer(std::size_t n, std::uint64_t seed) {
  ReplayBuffer buf(n);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t k = 0; k < n; ++k) {
    Transition t;
    for (int i = 0; i < kObsDim; ++i) t.s(i) = u(rng), t.s_next(i) = u(rng);
    for (int i = 0; i < kActDim; ++i) t.a(i) = u(rng);
    t.r = u(rng);
    t.done = k % 7 == 0;
    buf.add(t);
  }
  return buf;
}

AgentConfig small_config() {
  AgentConfig cfg;
  cfg.hidden_layers = {8, 8};
  cfg.batch_size = 16;
  cfg.buffer_capacity = 64;
  return cfg;
}

}  // namespace

TEST_SUITE("sac") {

TEST_CASE("network forward matches a hand computation") {
  nn::Architecture arch{{2, 2, 1}, nn::Activation::kRelu};
  nn::Mlp<double> net(arch);
  net.params() << 1.0, -1.0, 2.0, 0.5, /*b0*/ 0.1, -0.2, /*W1*/ 3.0, -4.0, /*b1*/ 0.25;
  nn::Mlp<double>::Cache cache;
  nn::Matrix<double> x(2, 1);
  x << 0.3, -0.7;
  // W0 is column-major: [[1, 2], [-1, 0.5]].
  const double h0 = std::max(0.0, 1.0 * 0.3 + 2.0 * -0.7 + 0.1);
  const double h1 = std::max(0.0, -1.0 * 0.3 + 0.5 * -0.7 - 0.2);
  CHECK(net.forward(x, cache)(0, 0) == doctest::Approx(3.0 * h0 - 4.0 * h1 + 0.25));
  CHECK(arch.param_count() == 9);
}

TEST_CASE("critic gradient matches central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = gradcheck::check_critic(seed);
    CHECK(r.rel_l2 < 1e-4);
    CHECK(r.worst_component < 1e-4);
  }
}

TEST_CASE("actor gradient matches central differences") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = gradcheck::check_actor(seed);
    CHECK(r.rel_l2 < 1e-4);
    CHECK(r.worst_component < 1e-4);
  }
}

TEST_CASE("Adam step follows the bias-corrected update") {
  nn::Adam<double> opt(2, 0.1);
  nn::Vector<double> p(2), g(2);
  p << 1.0, -1.0;
  g << 0.5, -2.0;
  opt.step(p, g);
  // After one step m_hat = g and v_hat = g^2.
  CHECK(p(0) == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(-1.0 + 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-12));
  nn::Vector<double> g2(2);
  g2 << 1.0, 1.0;
  opt.step(p, g2);
  const double m0 = 0.9 * 0.1 * 0.5 + 0.1 * 1.0, v0 = 0.999 * 0.001 * 0.25 + 0.001 * 1.0;
  const double expect0 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * (m0 / (1 - 0.81)) / (std::sqrt(v0 / (1 - 0.998001)) + 1e-8);
  CHECK(p(0) == doctest::Approx(expect0).epsilon(1e-12));
}

TEST_CASE("Polyak averaging extremes") {
  nn::Mlp<double> online(critic_architecture({4})), target(critic_architecture({4}));
  Rng rng(1);
  online.init_uniform(rng);
  target.init_uniform(rng);
  const auto before = target.params();
  sac::polyak_update(online, target, 0.0);
  CHECK(target.params() == before);
  sac::polyak_update(online, target, 0.5);
  CHECK((target.params() - 0.5 * (before + online.params())).norm() < 1e-15);
  sac::polyak_update(online, target, 1.0);
  CHECK(target.params() == online.params());
}

TEST_CASE("Bellman targets use the smaller twin unless told otherwise") {
  gradcheck::Fixture f(4);
  RowD rew = RowD::Constant(f.obs.cols(), 0.5);
  RowD done = RowD::Zero(f.obs.cols());
  done(0) = 1.0;
  const auto y_min = sac::bellman_targets<double>(f.actor, f.q1, f.q2, f.obs, f.eps, rew, done, f.alpha, 0.9,
                                                  TargetMode::kMinOfTwin);
  const auto y_one = sac::bellman_targets<double>(f.actor, f.q1, f.q2, f.obs, f.eps, rew, done, f.alpha, 0.9,
                                                  TargetMode::kFirstCriticOnly);
  sac::SquashedSample<double> smp;
  nn::Mlp<double>::Cache ca, c1, c2;
  sac::squash_sample(f.actor, f.obs, f.eps, ca, smp);
  const auto x = sac::critic_input<double>(f.obs, smp.action);
  const RowD qa = f.q1.forward(x, c1).row(0), qb = f.q2.forward(x, c2).row(0);
  for (Eigen::Index j = 0; j < f.obs.cols(); ++j) {
    const double cont = j == 0 ? 0.0 : 1.0;
    CHECK(y_min(j) == doctest::Approx(0.5 + 0.9 * cont * (std::min(qa(j), qb(j)) - f.alpha * smp.log_prob(j))));
    CHECK(y_one(j) == doctest::Approx(0.5 + 0.9 * cont * (qa(j) - f.alpha * smp.log_prob(j))));
  }
  CHECK(y_min(0) == 0.5);
}

TEST_CASE("squashed log-probability matches the change-of-variables density") {
  gradcheck::Fixture f(6, 4);
  sac::SquashedSample<double> smp;
  nn::Mlp<double>::Cache cache;
  sac::squash_sample(f.actor, f.obs, f.eps, cache, smp);
  const auto& head = f.actor.forward(f.obs, cache);
  for (Eigen::Index j = 0; j < f.obs.cols(); ++j) {
    double lp = 0.0;
    for (int i = 0; i < kActDim; ++i) {
      const double mu = head(i, j);
      const double sd = std::exp(std::clamp(head(kActDim + i, j), kLogStdMin, kLogStdMax));
      const double u = mu + sd * f.eps(i, j);
      const double a = std::tanh(u);
      lp += -0.5 * std::pow((u - mu) / sd, 2) - std::log(sd) - 0.5 * std::log(2 * M_PI) - std::log(1 - a * a + kTanhEps);
    }
    CHECK(smp.log_prob(j) == doctest::Approx(lp).epsilon(1e-12));
  }
}

TEST_CASE("learner update rules") {
  SUBCASE("empty or short buffer is rejected") {
    const AgentConfig cfg = small_config();
    Rng rng(0);
    SacLearner learner(cfg, rng);
    ReplayBuffer empty(32);
    CHECK_THROWS_AS(learner.update(empty, rng), std::logic_error);
    const ReplayBuffer few = filled_buffer(8, 1);
    CHECK_THROWS_AS(learner.update(few, rng), std::logic_error);
  }
  SUBCASE("tau = 1 copies the online critics") {
    AgentConfig cfg = small_config();
    cfg.tau_polyak = 1.0;
    Rng rng(0);
    SacLearner learner(cfg, rng);
    const ReplayBuffer buf = filled_buffer(64, 2);
    learner.update(buf, rng);
    CHECK(learner.target_critic(0).params() == learner.critic(0).params());
    CHECK(learner.target_critic(1).params() == learner.critic(1).params());
  }
  SUBCASE("tau = 0 freezes the targets") {
    AgentConfig cfg = small_config();
    cfg.tau_polyak = 0.0;
    Rng rng(0);
    SacLearner learner(cfg, rng);
    const auto t0 = learner.target_critic(0).params();
    const auto c0 = learner.critic(0).params();
    const ReplayBuffer buf = filled_buffer(64, 2);
    for (int i = 0; i < 3; ++i) learner.update(buf, rng);
    CHECK(learner.target_critic(0).params() == t0);
    CHECK(learner.critic(0).params() != c0);
  }
  SUBCASE("fixed temperature stays put, automatic tuning moves it") {
    AgentConfig cfg = small_config();
    cfg.fixed_temperature = 0.2;
    Rng rng(0);
    SacLearner fixed(cfg, rng);
    const ReplayBuffer buf = filled_buffer(64, 3);
    fixed.update(buf, rng);
    CHECK(fixed.temperature() == doctest::Approx(0.2).epsilon(1e-15));
    AgentConfig autocfg = small_config();
    Rng rng2(0);
    SacLearner tuned(autocfg, rng2);
    tuned.update(buf, rng2);
    CHECK(tuned.temperature() != 1.0);
  }
  SUBCASE("same seed gives identical parameters") {
    const AgentConfig cfg = small_config();
    const ReplayBuffer buf = filled_buffer(64, 4);
    Rng a(9), b(9);
    SacLearner la(cfg, a), lb(cfg, b);
    for (int i = 0; i < 5; ++i) {
      la.update(buf, a);
      lb.update(buf, b);
    }
    CHECK(la.actor().params() == lb.actor().params());
    CHECK(la.critic(1).params() == lb.critic(1).params());
  }
  SUBCASE("a poisoned critic surfaces as a runtime error") {
    const AgentConfig cfg = small_config();
    Rng rng(0);
    SacLearner learner(cfg, rng);
    learner.mutable_critic(0).params()(0) = NAN;
    const ReplayBuffer buf = filled_buffer(64, 5);
    CHECK_THROWS_AS(learner.update(buf, rng), std::runtime_error);
  }
}

TEST_CASE("agent config validation") {
  AgentConfig cfg;
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = AgentConfig{};
  cfg.tau_polyak = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = AgentConfig{};
  cfg.batch_size = 512;
  cfg.buffer_capacity = 256;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("action selection") {
  nn::Mlp<float> net(actor_architecture({16, 16}));
  Rng init(3);
  net.init_uniform(init);
  // Widen the mean head so that the squashing matters.
  net.params() *= 3.0f;
  const PolicyParams params = policy_from_actor(net, 0.02);
  Observation obs;
  obs << 0.0, 0.0, 0.45, 0.1, -0.2, 0.3, 0.0, 0.0, 0.0;
  Rng rng(1);
  const Vec3 d1 = select_action(params, obs, ActionMode::kDeterministic, rng);
  const Vec3 d2 = select_action(params, obs, ActionMode::kDeterministic, rng);
  CHECK(d1 == d2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = select_action(params, obs, ActionMode::kStochastic, rng);
    REQUIRE(a.cwiseAbs().maxCoeff() <= 0.02);
  }

  // Monte-Carlo oracle: sample the same squashed Gaussian directly.
  nn::Mlp<float>::Cache cache;
  const Eigen::MatrixXf head = net.forward(obs.cast<float>(), cache);
  Rng oracle_rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  const int N = 10000;
  Vec3 sum = Vec3::Zero(), sum_sq = Vec3::Zero(), oracle = Vec3::Zero();
  for (int k = 0; k < N; ++k) {
    const Vec3 a = select_action(params, obs, ActionMode::kStochastic, rng);
    sum += a;
    sum_sq += a.cwiseProduct(a);
    Vec3 b;
    for (int i = 0; i < 3; ++i) {
      const double sd = std::exp(std::clamp(double(head(3 + i, 0)), kLogStdMin, kLogStdMax));
      b(i) = 0.02 * std::tanh(double(head(i, 0)) + sd * n(oracle_rng));
    }
    oracle += b;
  }
  const Vec3 mean = sum / N, oracle_mean = oracle / N;
  for (int i = 0; i < 3; ++i) {
    const double var = sum_sq(i) / N - mean(i) * mean(i);
    const double se = std::sqrt(2.0 * var / N);  // difference of two independent means
    CHECK(std::abs(mean(i) - oracle_mean(i)) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("non-finite network output raises a diagnostic") {
  nn::Mlp<float> net(actor_architecture({4}));
  net.params().setConstant(NAN);
  const PolicyParams params = policy_from_actor(net, 0.02);
  Rng rng(0);
  try {
    select_action(params, Observation::Zero(), ActionMode::kDeterministic, rng);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("params") != std::string::npos);
  }
}

}

TEST_SUITE("sac") {

TEST_CASE("training loop contracts") {
  AgentConfig cfg = small_config();
  cfg.total_env_steps = 0;
  const SeedRun none = train_seed(EnvConfig{}, reward_preset("RF5"), cfg, 3);
  CHECK(none.curve.empty());
  CHECK_FALSE(none.diverged);
  Rng rng(derive_seed(3, kLearnerStream));
  const SacLearner fresh(cfg, rng);
  CHECK(none.policy.params == fresh.actor().params());

  cfg.total_env_steps = 600;
  cfg.learning_starts = 100;
  const SeedRun a = train_seed(EnvConfig{}, reward_preset("RF5"), cfg, 3);
  const SeedRun b = train_seed(EnvConfig{}, reward_preset("RF5"), cfg, 3);
  REQUIRE_FALSE(a.curve.empty());
  CHECK(curves_to_csv({a}) == curves_to_csv({b}));
  CHECK(a.policy == b.policy);
  CHECK(a.curve.back().steps <= 600);
  for (std::size_t i = 1; i < a.curve.size(); ++i) CHECK(a.curve[i].steps > a.curve[i - 1].steps);

  cfg.seeds = {3, 4};
  TrainOptions opts;
  opts.workers = 2;
  const TrainResult r = train(EnvConfig{}, reward_preset("RF5"), cfg, opts);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[0].policy == a.policy);
  CHECK(r.return_std >= 0.0);
}

}
