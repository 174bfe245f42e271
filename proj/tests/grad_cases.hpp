#pragma once

// Finite-difference checks for every network shape the agents build. Each
// case draws its weights, inputs and loss coefficients from `seed`.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "farm/agents/policy_net.hpp"
#include "farm/agents/sac.hpp"
#include "farm/neural/categorical.hpp"
#include "farm/neural/grad_check.hpp"
#include "farm/neural/mlp.hpp"
#include "farm/rng.hpp"

namespace gradcase {

using farm::Rng;
using farm::nn::GradCheckResult;
using farm::nn::Index;
using farm::nn::Matrix;
using farm::nn::Param;
using farm::nn::ParamList;
using farm::nn::Vector;

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

inline ParamList with(ParamList list, Param* extra) {
  list.push_back(extra);
  return list;
}

// Shifts the update-gate biases of every GRU in `params` so hidden state is
// mostly carried over; gradients from the first of 24 steps then stay well
// above finite-difference noise.
inline void favour_memory(const ParamList& params, double bias = 2.0) {
  const std::string suffix = "gru.b_ih";
  for (Param* p : params) {
    if (p->name.size() < suffix.size() ||
        p->name.compare(p->name.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    const Index h = p->value.rows() / 3;
    p->value.middleRows(h, h).array() += bias;
  }
}

// Forecast-aware layout: scalars followed by a 24-lead, 2-channel block.
inline farm::ObservationLayout forecast_layout() { return {10, 24, 2}; }

inline farm::EncoderSpec small_encoder(const farm::ObservationLayout& layout) {
  farm::EncoderSpec s;
  s.layout = layout;
  s.trunk = {8, 8};
  s.gru_hidden = 6;
  s.gru_dropout = 0.1;
  return s;
}

/// Tanh trunk with activated output; the input is checked too.
inline GradCheckResult mlp_trunk(std::uint64_t seed) {
  Rng rng(seed);
  farm::nn::MlpSpec spec{{5, 16, 16}, true};
  farm::nn::Mlp mlp("trunk", spec);
  mlp.init(rng);
  Param x("x", 5, 4);
  x.value = random_matrix(5, 4, rng);
  const Matrix w = random_matrix(16, 4, rng);
  auto loss = [&] { return (mlp.forward(x.value).array() * w.array()).sum(); };
  auto backward = [&] {
    farm::nn::Mlp::Cache c;
    mlp.forward(x.value, &c);
    x.grad = mlp.backward(c, w);
  };
  return farm::nn::grad_check(loss, backward, with(mlp.params(), &x));
}

/// Linear-output MLP head under a squared loss.
inline GradCheckResult mlp_head(std::uint64_t seed) {
  Rng rng(seed);
  farm::nn::Mlp mlp("head", {{8, 12, 3}, false});
  mlp.init(rng);
  const Matrix x = random_matrix(8, 5, rng);
  const Matrix target = random_matrix(3, 5, rng);
  auto loss = [&] { return 0.5 * (mlp.forward(x) - target).squaredNorm(); };
  auto backward = [&] {
    farm::nn::Mlp::Cache c;
    const Matrix y = mlp.forward(x, &c);
    mlp.backward(c, y - target);
  };
  return farm::nn::grad_check(loss, backward, mlp.params());
}

/// GRU over 24 steps with a fixed dropout mask; inputs of every step checked.
inline GradCheckResult gru_bptt(std::uint64_t seed) {
  Rng rng(seed);
  farm::nn::Gru gru("gru", {6, 8, 0.1});
  gru.init(rng);
  favour_memory(gru.params());
  const Index steps = 24, batch = 3;
  Param x("x", 6, steps * batch);
  x.value = random_matrix(6, steps * batch, rng);
  const Matrix w = random_matrix(8, batch, rng);
  const std::uint64_t mask_seed = rng.next_u64();
  auto sequence = [&] {
    std::vector<Matrix> seq;
    for (Index t = 0; t < steps; ++t) seq.push_back(x.value.middleCols(t * batch, batch));
    return seq;
  };
  auto loss = [&] {
    Rng mask(mask_seed);
    return (gru.encode(sequence(), true, &mask).array() * w.array()).sum();
  };
  auto backward = [&] {
    Rng mask(mask_seed);
    farm::nn::Gru::Cache c;
    gru.encode(sequence(), true, &mask, &c);
    const auto dx = gru.backward(c, w);
    for (Index t = 0; t < steps; ++t) x.grad.middleCols(t * batch, batch) = dx[static_cast<std::size_t>(t)];
  };
  return farm::nn::grad_check(loss, backward, with(gru.params(), &x));
}

/// DQN / SAC critic: encoder + linear Q head, squared TD error on taken actions.
inline GradCheckResult q_network(std::uint64_t seed) {
  Rng rng(seed);
  const auto layout = forecast_layout();
  farm::HeadNet q("q", small_encoder(layout), 2, 1.0);
  q.init(rng);
  const Index batch = 4;
  const Matrix obs = random_matrix(static_cast<Index>(layout.size()), batch, rng);
  std::vector<Index> actions;
  for (Index j = 0; j < batch; ++j) actions.push_back(static_cast<Index>(rng.below(2)));
  const Matrix target = random_matrix(1, batch, rng);
  const std::uint64_t mask_seed = rng.next_u64();
  auto loss = [&] {
    Rng mask(mask_seed);
    const Matrix y = q.forward(obs, true, &mask);
    double l = 0.0;
    for (Index j = 0; j < batch; ++j) l += 0.5 * std::pow(y(actions[j], j) - target(0, j), 2);
    return l;
  };
  auto backward = [&] {
    Rng mask(mask_seed);
    farm::HeadNet::Cache c;
    const Matrix y = q.forward(obs, true, &mask, &c);
    Matrix d = Matrix::Zero(2, batch);
    for (Index j = 0; j < batch; ++j) d(actions[j], j) = y(actions[j], j) - target(0, j);
    q.backward(c, d);
  };
  return farm::nn::grad_check(loss, backward, q.params());
}

/// PPO actor-critic (shared or separate encoders) under the full update loss:
/// clipped surrogate, value error, entropy bonus and KL penalty.
inline GradCheckResult actor_critic(std::uint64_t seed, bool shared) {
  Rng rng(seed);
  const auto layout = forecast_layout();
  farm::ActorCritic net(small_encoder(layout), 3, shared, rng);
  favour_memory(net.params());
  // The 0.01 actor-head init would shrink every actor gradient towards noise.
  for (Param* p : net.params())
    if (p->name == "actor.head.weight") p->value = random_matrix(p->value.rows(), p->value.cols(), rng, 0.3);
  const Index batch = 5;
  const Matrix obs = random_matrix(static_cast<Index>(layout.size()), batch, rng);
  const std::uint64_t mask_seed = rng.next_u64();
  const double clip = 0.2, vc = 0.5, ec = 0.01, ckl = 0.7;
  Matrix logits;
  {
    Rng mask(mask_seed);
    logits = net.forward(obs, true, &mask).logits;
  }
  const Matrix log_p = farm::nn::log_softmax(logits);
  // Old policy and actions are redrawn until no ratio sits on a clip edge,
  // where the surrogate has no derivative.
  Matrix log_p_old;
  std::vector<std::size_t> actions;
  for (bool near_kink = true; near_kink;) {
    log_p_old = farm::nn::log_softmax(logits + random_matrix(3, batch, rng, 0.3));
    actions.clear();
    near_kink = false;
    for (Index j = 0; j < batch; ++j) {
      actions.push_back(rng.below(3));
      const auto a = static_cast<Index>(actions.back());
      const double ratio = std::exp(log_p(a, j) - log_p_old(a, j));
      near_kink = near_kink || std::abs(ratio - (1 - clip)) < 1e-3 || std::abs(ratio - (1 + clip)) < 1e-3;
    }
  }
  const Matrix p_old = log_p_old.array().exp().matrix();
  Vector adv(batch), ret(batch);
  for (Index j = 0; j < batch; ++j) {
    adv(j) = rng.normal();
    ret(j) = rng.normal();
  }

  auto terms = [&](const farm::ActorCritic::Output& o, Matrix* d_logits, Matrix* d_values) {
    const Matrix logp = farm::nn::log_softmax(o.logits);
    const Matrix p = logp.array().exp().matrix();
    const Vector ent = farm::nn::entropy(logp);
    const Vector kl = farm::nn::kl_divergence(log_p_old, logp);
    double l = 0.0;
    Vector w_pg(batch);
    for (Index j = 0; j < batch; ++j) {
      const auto a = static_cast<Index>(actions[static_cast<std::size_t>(j)]);
      const double ratio = std::exp(logp(a, j) - log_p_old(a, j));
      const double un = ratio * adv(j);
      const double cl = std::clamp(ratio, 1 - clip, 1 + clip) * adv(j);
      l += -std::min(un, cl) + vc * 0.5 * std::pow(o.values(0, j) - ret(j), 2) - ec * ent(j) +
           ckl * kl(j);
      w_pg(j) = un <= cl ? -un : 0.0;
    }
    if (d_logits) {
      *d_logits = farm::nn::grad_log_prob(p, actions, w_pg) +
                  farm::nn::grad_entropy(p, logp, Vector::Constant(batch, -ec)) +
                  farm::nn::grad_kl(p_old, p, Vector::Constant(batch, ckl));
      *d_values = vc * (o.values - ret.transpose());
    }
    return l;
  };
  auto loss = [&] {
    Rng mask(mask_seed);
    return terms(net.forward(obs, true, &mask), nullptr, nullptr);
  };
  auto backward = [&] {
    Rng mask(mask_seed);
    const auto o = net.forward(obs, true, &mask);
    Matrix dl, dv;
    terms(o, &dl, &dv);
    net.backward(o, dl, dv);
  };
  return farm::nn::grad_check(loss, backward, net.params());
}

/// Discrete SAC actor objective through a policy head.
inline GradCheckResult sac_actor(std::uint64_t seed) {
  Rng rng(seed);
  const auto layout = forecast_layout();
  farm::HeadNet actor("actor", small_encoder(layout), 2, 1.0);
  actor.init(rng);
  const Index batch = 4;
  const Matrix obs = random_matrix(static_cast<Index>(layout.size()), batch, rng);
  const Matrix q1 = random_matrix(2, batch, rng), q2 = random_matrix(2, batch, rng);
  const Matrix qmin = q1.cwiseMin(q2);
  const double alpha = 0.3;
  const std::uint64_t mask_seed = rng.next_u64();
  auto loss = [&] {
    Rng mask(mask_seed);
    const Matrix p = farm::nn::softmax(actor.forward(obs, true, &mask));
    double l = 0.0;
    for (Index j = 0; j < batch; ++j)
      l += farm::sac_actor_loss({p.col(j).data(), 2}, {q1.col(j).data(), 2}, {q2.col(j).data(), 2},
                                alpha);
    return l;
  };
  auto backward = [&] {
    Rng mask(mask_seed);
    farm::HeadNet::Cache c;
    const Matrix logp = farm::nn::log_softmax(actor.forward(obs, true, &mask, &c));
    const Matrix p = logp.array().exp().matrix();
    Matrix d(2, batch);
    for (Index j = 0; j < batch; ++j)
      d.col(j) = farm::sac_actor_logit_grad(p.col(j), logp.col(j), qmin.col(j), alpha);
    actor.backward(c, d);
  };
  return farm::nn::grad_check(loss, backward, actor.params());
}

struct NamedCase {
  const char* name;
  GradCheckResult (*run)(std::uint64_t);
};

inline GradCheckResult actor_critic_shared(std::uint64_t s) { return actor_critic(s, true); }
inline GradCheckResult actor_critic_separate(std::uint64_t s) { return actor_critic(s, false); }

inline const std::vector<NamedCase>& all_cases() {
  static const std::vector<NamedCase> cases = {
      {"mlp_trunk", mlp_trunk},
      {"mlp_head", mlp_head},
      {"gru_bptt_24", gru_bptt},
      {"q_network", q_network},
      {"actor_critic_shared", actor_critic_shared},
      {"actor_critic_separate", actor_critic_separate},
      {"sac_actor", sac_actor},
  };
  return cases;
}

}  // namespace gradcase
