#include "farm/agents/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "farm/errors.hpp"
#include "farm/neural/categorical.hpp"

namespace farm {

using nn::Index;
using nn::Matrix;

void DqnConfig::validate() const {
  if (buffer < batch) throw ConfigError("dqn buffer must hold at least one batch");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("dqn gamma must lie in [0, 1]");
  if (!(lr > 0.0)) throw ConfigError("dqn learning rate must be positive");
  if (eps_decay_fraction <= 0.0 || eps_decay_fraction > 1.0)
    throw ConfigError("eps_decay_fraction must lie in (0, 1]");
  if (total_steps < 1 || target_sync_steps < 1 || train_frequency < 1 || batch == 0)
    throw ConfigError("dqn sizes must be positive");
}

double dqn_target(double reward, double gamma, std::span<const double> next_q, bool done) {
  if (done) return reward;
  return reward + gamma * *std::max_element(next_q.begin(), next_q.end());
}

double dqn_epsilon(const DqnConfig& c, long step) {
  const double duration = c.eps_decay_fraction * static_cast<double>(c.total_steps);
  const double slope = (c.eps_end - c.eps_start) / duration;
  return std::max(c.eps_end, c.eps_start + slope * static_cast<double>(step));
}

DqnAgent::DqnAgent(ObservationLayout layout, std::size_t actions, DqnConfig config,
                   EncoderSpec encoder, std::uint64_t seed)
    : config_(config),
      actions_(actions),
      rng_(seed),
      q_("q", with_layout(encoder, layout), static_cast<Index>(actions), 1.0),
      target_("q_target", with_layout(encoder, layout), static_cast<Index>(actions), 1.0),
      opt_(q_.params(), nn::AdamConfig{config.lr}),
      buffer_(config.buffer) {
  config_.validate();
  q_.init(rng_);
  nn::copy_values(q_.params(), target_.params());
}

nn::Vector DqnAgent::q_values(const std::vector<double>& obs) const {
  return q_.forward(to_matrix(obs), false, nullptr).col(0);
}

std::size_t DqnAgent::act(const std::vector<double>& obs) { return nn::argmax(q_values(obs)); }

double DqnAgent::update() {
  const auto idx = buffer_.sample(config_.batch, rng_);
  const Index b = static_cast<Index>(idx.size());
  Matrix obs(static_cast<Index>(buffer_[0].obs.size()), b);
  Matrix next(obs.rows(), b);
  for (Index j = 0; j < b; ++j) {
    const auto& t = buffer_[idx[static_cast<std::size_t>(j)]];
    obs.col(j) = to_matrix(t.obs);
    next.col(j) = to_matrix(t.next_obs);
  }
  const Matrix next_q = target_.forward(next, false, nullptr);
  HeadNet::Cache cache;
  const Matrix q = q_.forward(obs, true, &rng_, &cache);
  Matrix dq = Matrix::Zero(q.rows(), b);
  double loss = 0.0;
  for (Index j = 0; j < b; ++j) {
    const auto& t = buffer_[idx[static_cast<std::size_t>(j)]];
    const double y = dqn_target(t.reward, config_.gamma,
                                std::span<const double>(next_q.col(j).data(), actions_), t.done);
    const double err = q(static_cast<Index>(t.action), j) - y;
    loss += err * err;
    dq(static_cast<Index>(t.action), j) = 2.0 * err / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);
  if (!std::isfinite(loss)) throw NumericsError("DQN loss is not finite");
  q_.backward(cache, dq);
  opt_.step();
  return loss;
}

TrainSummary DqnAgent::train(DiscreteEnv& env, const StatsSink& sink) {
  Rng env_rng = rng_.split();
  TrainSummary summary;
  std::vector<double> obs = env.reset(env_rng);
  double ep_return = 0.0;
  for (long step = 0; step < config_.total_steps; ++step) {
    const double eps = dqn_epsilon(config_, step);
    std::size_t action;
    if (rng_.uniform() < eps)
      action = rng_.below(actions_);
    else
      action = act(obs);
    auto res = env.step(action);
    ep_return += res.reward;
    buffer_.push({obs, action, res.reward, res.obs, res.done});
    if (res.done) {
      summary.episode_returns.push_back(ep_return);
      if (sink) sink({"episode", step + 1, {{"return", ep_return}}});
      ep_return = 0.0;
      obs = env.reset(env_rng);
    } else {
      obs = std::move(res.obs);
    }

    if (step >= config_.learning_starts) {
      if (step % config_.train_frequency == 0) {
        const double loss = update();
        ++summary.updates;
        if (sink && summary.updates % 100 == 0)
          sink({"update", step + 1, {{"td_loss", loss}, {"epsilon", eps}}});
      }
      if (step % config_.target_sync_steps == 0) nn::copy_values(q_.params(), target_.params());
    }
  }
  summary.steps = config_.total_steps;
  return summary;
}

}  // namespace farm
