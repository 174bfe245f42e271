#include "farm/agents/sac.hpp"

#include <algorithm>
#include <cmath>

#include "farm/errors.hpp"
#include "farm/neural/categorical.hpp"

namespace farm {

using nn::Index;
using nn::Matrix;
using nn::Vector;

void SacConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("sac tau must lie in (0, 1]");
  if (buffer < batch) throw ConfigError("sac buffer must hold at least one batch");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("sac gamma must lie in [0, 1]");
  if (!(lr > 0.0) || !(initial_alpha > 0.0)) throw ConfigError("sac lr and alpha must be positive");
  if (total_steps < 1 || update_frequency < 1 || batch == 0)
    throw ConfigError("sac sizes must be positive");
}

double sac_soft_value(std::span<const double> p, std::span<const double> q1,
                      std::span<const double> q2, double alpha) {
  double v = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double log_p = p[a] > 0.0 ? std::log(p[a]) : 0.0;
    v += p[a] * (std::min(q1[a], q2[a]) - alpha * log_p);
  }
  return v;
}

double sac_actor_loss(std::span<const double> p, std::span<const double> q1,
                      std::span<const double> q2, double alpha) {
  double v = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    const double log_p = p[a] > 0.0 ? std::log(p[a]) : 0.0;
    v += p[a] * (alpha * log_p - std::min(q1[a], q2[a]));
  }
  return v;
}

Vector sac_actor_logit_grad(const Vector& p, const Vector& log_p, const Vector& q_min,
                            double alpha) {
  const Vector g = alpha * log_p - q_min;
  const double mean = p.dot(g);
  return (p.array() * (g.array() - mean)).matrix();
}

namespace {

EncoderSpec sac_encoder(EncoderSpec spec, const ObservationLayout& layout, const SacConfig& c) {
  spec.layout = layout;
  spec.gru_dropout = c.gru_dropout;
  return spec;
}

}  // namespace

SacAgent::SacAgent(ObservationLayout layout, std::size_t actions, SacConfig config,
                   EncoderSpec encoder, std::uint64_t seed)
    : config_(config),
      actions_(actions),
      rng_(seed),
      actor_("actor", sac_encoder(encoder, layout, config),
             static_cast<Index>(actions), 0.01),
      q1_("q1", sac_encoder(encoder, layout, config), static_cast<Index>(actions), 1.0),
      q2_("q2", sac_encoder(encoder, layout, config), static_cast<Index>(actions), 1.0),
      q1_target_("q1_target", sac_encoder(encoder, layout, config), static_cast<Index>(actions), 1.0),
      q2_target_("q2_target", sac_encoder(encoder, layout, config), static_cast<Index>(actions), 1.0),
      log_alpha_("log_alpha", 1, 1),
      actor_opt_(actor_.params(), nn::AdamConfig{config.lr}),
      q_opt_([this] {
        auto p = q1_.params();
        auto p2 = q2_.params();
        p.insert(p.end(), p2.begin(), p2.end());
        return p;
      }(), nn::AdamConfig{config.lr}),
      alpha_opt_({&log_alpha_}, nn::AdamConfig{config.lr}),
      buffer_(config.buffer) {
  config_.validate();
  actor_.init(rng_);
  q1_.init(rng_);
  q2_.init(rng_);
  nn::copy_values(q1_.params(), q1_target_.params());
  nn::copy_values(q2_.params(), q2_target_.params());
  log_alpha_.value(0, 0) = std::log(config_.initial_alpha);
}

double SacAgent::alpha() const { return std::exp(log_alpha_.value(0, 0)); }

double SacAgent::target_entropy() const {
  return config_.target_entropy_scale * std::log(static_cast<double>(actions_));
}

nn::ParamList SacAgent::params() {
  auto p = actor_.params();
  for (HeadNet* n : {&q1_, &q2_}) {
    auto q = n->params();
    p.insert(p.end(), q.begin(), q.end());
  }
  p.push_back(&log_alpha_);
  return p;
}

Vector SacAgent::probabilities(const std::vector<double>& obs) const {
  return nn::softmax(actor_.forward(to_matrix(obs), false, nullptr)).col(0);
}

std::size_t SacAgent::act(const std::vector<double>& obs) {
  return nn::argmax(actor_.forward(to_matrix(obs), false, nullptr).col(0));
}

SacAgent::UpdateStats SacAgent::update() {
  const auto idx = buffer_.sample(config_.batch, rng_);
  const Index b = static_cast<Index>(idx.size());
  const double inv_b = 1.0 / static_cast<double>(b);
  Matrix obs(static_cast<Index>(buffer_[0].obs.size()), b);
  Matrix next(obs.rows(), b);
  for (Index j = 0; j < b; ++j) {
    const auto& t = buffer_[idx[static_cast<std::size_t>(j)]];
    obs.col(j) = to_matrix(t.obs);
    next.col(j) = to_matrix(t.next_obs);
  }
  const double a = alpha();
  UpdateStats st;

  // Critics.
  const Matrix next_logp = nn::log_softmax(actor_.forward(next, false, nullptr));
  const Matrix next_p = next_logp.array().exp().matrix();
  const Matrix qt1 = q1_target_.forward(next, false, nullptr);
  const Matrix qt2 = q2_target_.forward(next, false, nullptr);
  HeadNet::Cache c1, c2;
  const Matrix q1 = q1_.forward(obs, true, &rng_, &c1);
  const Matrix q2 = q2_.forward(obs, true, &rng_, &c2);
  Matrix d1 = Matrix::Zero(q1.rows(), b);
  Matrix d2 = Matrix::Zero(q2.rows(), b);
  for (Index j = 0; j < b; ++j) {
    const auto& t = buffer_[idx[static_cast<std::size_t>(j)]];
    const std::size_t k = static_cast<std::size_t>(next_p.rows());
    const double v_next = sac_soft_value(std::span<const double>(next_p.col(j).data(), k),
                                         std::span<const double>(qt1.col(j).data(), k),
                                         std::span<const double>(qt2.col(j).data(), k), a);
    const double y = t.reward + (t.done ? 0.0 : config_.gamma * v_next);
    const Index act = static_cast<Index>(t.action);
    const double e1 = q1(act, j) - y;
    const double e2 = q2(act, j) - y;
    st.q_loss += (e1 * e1 + e2 * e2) * inv_b;
    d1(act, j) = 2.0 * e1 * inv_b;
    d2(act, j) = 2.0 * e2 * inv_b;
  }
  if (!std::isfinite(st.q_loss)) throw NumericsError("SAC critic loss is not finite");
  q1_.backward(c1, d1);
  q2_.backward(c2, d2);
  q_opt_.step();

  // Actor, against the freshly updated critics.
  HeadNet::Cache ca;
  const Matrix logits = actor_.forward(obs, true, &rng_, &ca);
  const Matrix logp = nn::log_softmax(logits);
  const Matrix p = logp.array().exp().matrix();
  const Matrix qmin =
      q1_.forward(obs, false, nullptr).cwiseMin(q2_.forward(obs, false, nullptr));
  Matrix d_logits(p.rows(), b);
  double ent_sum = 0.0;
  for (Index j = 0; j < b; ++j) {
    d_logits.col(j) = sac_actor_logit_grad(p.col(j), logp.col(j), qmin.col(j), a) * inv_b;
    st.actor_loss += (p.col(j).array() * (a * logp.col(j).array() - qmin.col(j).array())).sum() * inv_b;
    ent_sum += -(p.col(j).array() * logp.col(j).array()).sum();
  }
  if (!std::isfinite(st.actor_loss)) throw NumericsError("SAC actor loss is not finite");
  actor_.backward(ca, d_logits);
  actor_opt_.step();
  st.entropy = ent_sum * inv_b;

  // Temperature: d/d log_alpha of -log_alpha (log pi + H_target), averaged.
  if (config_.autotune) {
    log_alpha_.grad(0, 0) = st.entropy - target_entropy();
    alpha_opt_.step();
  }

  nn::polyak_update(q1_.params(), q1_target_.params(), config_.tau);
  nn::polyak_update(q2_.params(), q2_target_.params(), config_.tau);
  return st;
}

TrainSummary SacAgent::train(DiscreteEnv& env, const StatsSink& sink) {
  Rng env_rng = rng_.split();
  TrainSummary summary;
  std::vector<double> obs = env.reset(env_rng);
  double ep_return = 0.0;
  for (long step = 0; step < config_.total_steps; ++step) {
    std::size_t action;
    if (step < config_.learning_starts) {
      action = rng_.below(actions_);
    } else {
      const Vector logits = actor_.forward(to_matrix(obs), false, nullptr).col(0);
      action = nn::sample_categorical(logits, rng_).action;
    }
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
    if (step >= config_.learning_starts && step % config_.update_frequency == 0) {
      const auto st = update();
      ++summary.updates;
      if (sink && summary.updates % 100 == 0)
        sink({"update",
              step + 1,
              {{"q_loss", st.q_loss}, {"actor_loss", st.actor_loss}, {"entropy", st.entropy},
               {"alpha", alpha()}}});
    }
  }
  summary.steps = config_.total_steps;
  return summary;
}

}  // namespace farm
