#include "safecontact/sac.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace safecontact {

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("AgentConfig: gamma must lie in (0, 1)");
  if (!(tau_polyak >= 0.0 && tau_polyak <= 1.0))
    throw std::invalid_argument("AgentConfig: tau_polyak must lie in [0, 1]");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw std::invalid_argument("AgentConfig: learning rates must be > 0");
  if (batch_size <= 0) throw std::invalid_argument("AgentConfig: batch_size must be positive");
  if (static_cast<std::size_t>(batch_size) > buffer_capacity)
    throw std::invalid_argument("AgentConfig: batch_size exceeds buffer_capacity");
  if (updates_per_step < 0) throw std::invalid_argument("AgentConfig: updates_per_step must be >= 0");
  if (hidden_layers.empty()) throw std::invalid_argument("AgentConfig: hidden_layers must not be empty");
  for (int h : hidden_layers)
    if (h <= 0) throw std::invalid_argument("AgentConfig: hidden layer widths must be positive");
  if (total_env_steps < 0) throw std::invalid_argument("AgentConfig: total_env_steps must be >= 0");
  if (learning_starts < 0) throw std::invalid_argument("AgentConfig: learning_starts must be >= 0");
  if (fixed_temperature && !(*fixed_temperature > 0.0))
    throw std::invalid_argument("AgentConfig: fixed temperature must be > 0");
  if (!(init_temperature > 0.0)) throw std::invalid_argument("AgentConfig: init_temperature must be > 0");
  if (seeds.empty()) throw std::invalid_argument("AgentConfig: seed list must not be empty");
}

nn::Architecture actor_architecture(const std::vector<int>& hidden) {
  nn::Architecture a;
  a.sizes.push_back(kObsDim);
  a.sizes.insert(a.sizes.end(), hidden.begin(), hidden.end());
  a.sizes.push_back(2 * kActDim);
  return a;
}

nn::Architecture critic_architecture(const std::vector<int>& hidden) {
  nn::Architecture a;
  a.sizes.push_back(kObsDim + kActDim);
  a.sizes.insert(a.sizes.end(), hidden.begin(), hidden.end());
  a.sizes.push_back(1);
  return a;
}

SacLearner::SacLearner(const AgentConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      actor_(actor_architecture(cfg.hidden_layers)),
      q1_(critic_architecture(cfg.hidden_layers)),
      q2_(critic_architecture(cfg.hidden_layers)) {
  cfg_.validate();
  actor_.init_uniform(init_rng);
  q1_.init_uniform(init_rng);
  q2_.init_uniform(init_rng);
  q1_target_ = q1_;
  q2_target_ = q2_;
  actor_opt_ = nn::Adam<float>(actor_.params().size(), cfg_.lr_actor);
  q1_opt_ = nn::Adam<float>(q1_.params().size(), cfg_.lr_critic);
  q2_opt_ = nn::Adam<float>(q2_.params().size(), cfg_.lr_critic);
  temp_opt_ = nn::Adam<double>(1, cfg_.lr_actor);
  log_temperature_ = nn::Vector<double>::Constant(1, std::log(cfg_.fixed_temperature.value_or(cfg_.init_temperature)));
}

double SacLearner::temperature() const { return std::exp(log_temperature_(0)); }

namespace {

Eigen::MatrixXf standard_normal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXf m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = static_cast<float>(n(rng));
  return m;
}

}  // namespace

SacLosses SacLearner::update(const ReplayBuffer& buffer, Rng& rng) {
  if (buffer.empty()) throw std::logic_error("SacLearner::update: replay buffer is empty");
  if (buffer.size() < static_cast<std::size_t>(cfg_.batch_size))
    throw std::logic_error("SacLearner::update: buffer holds fewer transitions than batch_size");

  buffer.gather(buffer.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng), batch_);
  const int b = cfg_.batch_size;
  const Eigen::MatrixXf eps_next = standard_normal(kActDim, b, rng);
  const Eigen::MatrixXf eps_now = standard_normal(kActDim, b, rng);
  const float alpha = static_cast<float>(temperature());

  SacLosses losses;
  losses.temperature = alpha;

  const Eigen::RowVectorXf target =
      sac::bellman_targets<float>(actor_, q1_target_, q2_target_, batch_.next_obs, eps_next, batch_.rew, batch_.done,
                                  alpha, static_cast<float>(cfg_.gamma), TargetMode::kMinOfTwin);
  const Eigen::MatrixXf x = sac::critic_input<float>(batch_.obs, batch_.act);

  nn::Vector<float> g1 = nn::Vector<float>::Zero(q1_.params().size());
  nn::Vector<float> g2 = nn::Vector<float>::Zero(q2_.params().size());
  losses.critic = sac::critic_loss_grad<float>(q1_, x, target, cache_, &g1);
  losses.critic += sac::critic_loss_grad<float>(q2_, x, target, cache_, &g2);
  if (!std::isfinite(losses.critic) || !g1.allFinite() || !g2.allFinite()) {
    throw std::runtime_error("SacLearner::update: non-finite critic loss " + std::to_string(losses.critic));
  }
  q1_opt_.step(q1_.params(), g1);
  q2_opt_.step(q2_.params(), g2);

  nn::Vector<float> ga = nn::Vector<float>::Zero(actor_.params().size());
  Eigen::RowVectorXf log_prob;
  losses.actor = sac::actor_loss_grad<float>(actor_, q1_, q2_, batch_.obs, eps_now, alpha, &ga, &log_prob);
  if (!std::isfinite(losses.actor) || !ga.allFinite()) {
    throw std::runtime_error("SacLearner::update: non-finite actor loss " + std::to_string(losses.actor));
  }
  actor_opt_.step(actor_.params(), ga);

  const double mean_lp_term = log_prob.cast<double>().array().mean() + cfg_.target_entropy;
  losses.temperature_loss = -log_temperature_(0) * mean_lp_term;
  if (!cfg_.fixed_temperature) {
    nn::Vector<double> gt = nn::Vector<double>::Constant(1, -mean_lp_term);
    temp_opt_.step(log_temperature_, gt);
  }

  if (!std::isfinite(log_temperature_(0))) throw std::runtime_error("SacLearner::update: non-finite temperature");

  sac::polyak_update(q1_, q1_target_, cfg_.tau_polyak);
  sac::polyak_update(q2_, q2_target_, cfg_.tau_polyak);
  return losses;
}

}  // namespace safecontact
