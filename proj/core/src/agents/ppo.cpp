#include "farm/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "farm/errors.hpp"
#include "farm/neural/categorical.hpp"

namespace farm {

using nn::Index;
using nn::Matrix;
using nn::Vector;

void pid_kl_update(PidKlState& s, double measured_kl) {
  const double e = measured_kl - s.target_kl;
  s.integral += e;
  const double d = e - s.prev_error;
  s.c_kl = std::max(0.0, s.c_kl + s.kp * e + s.ki * s.integral + s.kd * d);
  s.prev_error = e;
}

PpoConfig PpoConfig::heater() { return PpoConfig{}; }

PpoConfig PpoConfig::battery() {
  PpoConfig c;
  c.lr = 3e-3;
  c.gamma = 0.89;
  c.clip = 0.2;
  c.minibatch = 64;
  return c;
}

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("ppo clip must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo gamma must lie in (0, 1]");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(lr > 0.0)) throw ConfigError("ppo learning rate must be positive");
  if (minibatch == 0 || rollout_len == 0 || epochs < 1 || total_steps < 1)
    throw ConfigError("ppo sizes must be positive");
  if (target_kl <= 0.0 || pid.target_kl <= 0.0) throw ConfigError("target KL must be positive");
}

void Trajectory::clear() {
  obs.clear();
  actions.clear();
  log_probs.clear();
  values.clear();
  rewards.clear();
  dones.clear();
}

Advantages gae_advantages(const Trajectory& traj, double gamma, double lambda,
                          double bootstrap_value) {
  const std::size_t n = traj.size();
  if (n == 0) throw ConfigError("empty trajectory");
  if (traj.values.size() != n || traj.dones.size() != n)
    throw ShapeError("trajectory fields have inconsistent lengths");
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double last = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double nonterminal = traj.dones[k] ? 0.0 : 1.0;
    const double next_value = k + 1 < n ? traj.values[k + 1] : bootstrap_value;
    const double delta = traj.rewards[k] + gamma * next_value * nonterminal - traj.values[k];
    last = delta + gamma * lambda * nonterminal * last;
    out.advantages[k] = last;
    out.returns[k] = last + traj.values[k];
  }
  return out;
}

double ppo_surrogate(double ratio, double advantage, double delta) {
  const double clipped = std::clamp(ratio, 1.0 - delta, 1.0 + delta);
  return std::min(ratio * advantage, clipped * advantage);
}

double ppo_clip_loss(double ratio, double advantage, double delta) {
  return -ppo_surrogate(ratio, advantage, delta);
}

namespace {

std::vector<double> normalized(const std::vector<double>& a) {
  const double n = static_cast<double>(a.size());
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : a) sq += (v - mean) * (v - mean);
  // Sample standard deviation, as torch.std.
  const double sd = a.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - mean) / (sd + 1e-8);
  return out;
}

double mean_kl(const ActorCritic& net, const Matrix& obs, const Matrix& log_p_old) {
  const auto o = net.forward(obs, false, nullptr);
  return nn::kl_divergence(log_p_old, nn::log_softmax(o.logits)).mean();
}

}  // namespace

PpoUpdateStats ppo_update(ActorCritic& net, nn::Adam& opt, const Trajectory& traj,
                          const Advantages& adv, const PpoConfig& cfg, PidKlState* pid,
                          Rng& rng) {
  const std::size_t n = traj.size();
  if (n == 0) throw ConfigError("empty trajectory");
  const bool pid_mode = cfg.trust == TrustRegion::pid_kl;
  if (pid_mode && !pid) throw ConfigError("pid_kl trust region needs a controller state");

  const Matrix all_obs = to_matrix(traj.obs);
  const Matrix log_p_old = nn::log_softmax(net.forward(all_obs, false, nullptr).logits);
  const Matrix p_old = log_p_old.array().exp().matrix();
  const std::vector<double> a_norm = normalized(adv.advantages);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const nn::ParamList params = net.params();

  PpoUpdateStats stats;
  double pl_sum = 0.0, vl_sum = 0.0, ent_sum = 0.0, klp_sum = 0.0, clip_sum = 0.0;
  std::size_t samples = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    const double c_kl = pid_mode ? pid->c_kl : 0.0;
    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      const std::size_t end = std::min(n, start + cfg.minibatch);
      const Index b = static_cast<Index>(end - start);
      const double inv_b = 1.0 / static_cast<double>(b);
      const Matrix obs = gather_columns(traj.obs, order, start, end);
      const auto out = net.forward(obs, true, &rng);
      const Matrix logp = nn::log_softmax(out.logits);
      const Matrix probs = logp.array().exp().matrix();
      const Vector ent = nn::entropy(logp);

      std::vector<std::size_t> actions(static_cast<std::size_t>(b));
      Vector w_pg(b);
      Vector w_ent = Vector::Constant(b, -cfg.entropy_coef * inv_b);
      Matrix d_values(1, b);
      Matrix old_cols_p(p_old.rows(), b);
      Matrix old_cols_logp(p_old.rows(), b);
      double pl = 0.0, vl = 0.0, clipped = 0.0;
      for (Index j = 0; j < b; ++j) {
        const std::size_t i = order[start + static_cast<std::size_t>(j)];
        const std::size_t a = traj.actions[i];
        actions[static_cast<std::size_t>(j)] = a;
        const double ratio = std::exp(logp(static_cast<Index>(a), j) - traj.log_probs[i]);
        const double A = a_norm[i];
        const double unclipped = ratio * A;
        const double clipped_term = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * A;
        pl += -std::min(unclipped, clipped_term);
        // d/dlogp of -min(...): the unclipped branch carries the gradient.
        w_pg(j) = unclipped <= clipped_term ? -unclipped * inv_b : 0.0;
        if (std::abs(ratio - 1.0) > cfg.clip) clipped += 1.0;
        const double verr = out.values(0, j) - adv.returns[i];
        vl += 0.5 * verr * verr;
        d_values(0, j) = cfg.value_coef * verr * inv_b;
        old_cols_p.col(j) = p_old.col(static_cast<Index>(i));
        old_cols_logp.col(j) = log_p_old.col(static_cast<Index>(i));
      }
      Matrix d_logits = nn::grad_log_prob(probs, actions, w_pg);
      d_logits += nn::grad_entropy(probs, logp, w_ent);
      double klp = 0.0;
      if (pid_mode) {
        klp = nn::kl_divergence(old_cols_logp, logp).mean();
        d_logits += nn::grad_kl(old_cols_p, probs, Vector::Constant(b, c_kl * inv_b));
      }
      const double loss = pl * inv_b + cfg.value_coef * vl * inv_b -
                          cfg.entropy_coef * ent.mean() + c_kl * klp;
      if (!std::isfinite(loss))
        throw NumericsError("PPO loss is not finite (epoch " + std::to_string(epoch) + ")");

      net.backward(out, d_logits, d_values);
      nn::clip_grad_norm(params, cfg.grad_clip);
      opt.step();

      pl_sum += pl;
      vl_sum += vl;
      ent_sum += ent.sum();
      klp_sum += klp * static_cast<double>(b);
      clip_sum += clipped;
      samples += static_cast<std::size_t>(b);
    }
    const double kl = mean_kl(net, all_obs, log_p_old);
    stats.epoch_kl.push_back(kl);
    stats.kl = kl;
    stats.epochs_run = epoch + 1;
    if (pid_mode) {
      pid_kl_update(*pid, kl);
    } else if (kl > 1.5 * cfg.target_kl) {
      break;
    }
  }
  const double ns = static_cast<double>(samples);
  stats.policy_loss = pl_sum / ns;
  stats.value_loss = vl_sum / ns;
  stats.entropy = ent_sum / ns;
  stats.kl_penalty = klp_sum / ns;
  stats.clip_fraction = clip_sum / ns;
  stats.c_kl = pid_mode ? pid->c_kl : 0.0;
  return stats;
}

PpoAgent::PpoAgent(ObservationLayout layout, std::size_t actions, PpoConfig config, PpoArch arch,
                   std::uint64_t seed)
    : config_(std::move(config)),
      rng_(seed),
      net_(with_layout(arch.encoder, layout), actions, arch.shared, rng_),
      opt_(net_.params(), nn::AdamConfig{config_.lr}) {
  config_.validate();
}

std::size_t PpoAgent::act(const std::vector<double>& obs) {
  return nn::argmax(net_.forward(to_matrix(obs), false, nullptr).logits.col(0));
}

nn::Vector PpoAgent::probabilities(const std::vector<double>& obs) const {
  return nn::softmax(net_.forward(to_matrix(obs), false, nullptr).logits).col(0);
}

TrainSummary PpoAgent::train(DiscreteEnv& env, const StatsSink& sink) {
  Rng env_rng = rng_.split();
  TrainSummary summary;
  Trajectory traj;
  std::vector<double> obs = env.reset(env_rng);
  double ep_return = 0.0;
  long step = 0;
  const long updates_planned =
      (config_.total_steps + static_cast<long>(config_.rollout_len) - 1) /
      static_cast<long>(config_.rollout_len);
  PidKlState* pid = config_.trust == TrustRegion::pid_kl ? &config_.pid : nullptr;

  while (step < config_.total_steps) {
    traj.clear();
    bool last_done = false;
    const long len = std::min<long>(static_cast<long>(config_.rollout_len), config_.total_steps - step);
    for (long k = 0; k < len; ++k) {
      const auto out = net_.forward(to_matrix(obs), false, nullptr);
      const auto s = nn::sample_categorical(out.logits.col(0), rng_);
      const auto res = env.step(s.action);
      traj.obs.push_back(std::move(obs));
      traj.actions.push_back(s.action);
      traj.log_probs.push_back(s.log_prob);
      traj.values.push_back(out.values(0, 0));
      traj.rewards.push_back(res.reward);
      traj.dones.push_back(res.done);
      ep_return += res.reward;
      ++step;
      last_done = res.done;
      if (res.done) {
        summary.episode_returns.push_back(ep_return);
        if (sink) sink({"episode", step, {{"return", ep_return}}});
        ep_return = 0.0;
        obs = env.reset(env_rng);
      } else {
        obs = res.obs;
      }
    }
    const double bootstrap =
        last_done ? 0.0 : net_.forward(to_matrix(obs), false, nullptr).values(0, 0);
    const Advantages adv = gae_advantages(traj, config_.gamma, config_.gae_lambda, bootstrap);
    if (config_.anneal_lr) {
      const double frac = 1.0 - static_cast<double>(summary.updates) / static_cast<double>(updates_planned);
      opt_.set_lr(config_.lr * frac);
    }
    const auto st = ppo_update(net_, opt_, traj, adv, config_, pid, rng_);
    ++summary.updates;
    summary.epoch_kls.insert(summary.epoch_kls.end(), st.epoch_kl.begin(), st.epoch_kl.end());
    if (sink) {
      StatsRecord rec{"update", step, {}};
      rec.fields = {{"policy_loss", st.policy_loss}, {"value_loss", st.value_loss},
                    {"entropy", st.entropy},         {"kl", st.kl},
                    {"kl_penalty", st.kl_penalty},   {"clip_fraction", st.clip_fraction},
                    {"epochs", static_cast<double>(st.epochs_run)},
                    {"c_kl", st.c_kl},               {"lr", opt_.lr()}};
      for (std::size_t e = 0; e < st.epoch_kl.size(); ++e)
        rec.fields.emplace_back("kl_epoch" + std::to_string(e), st.epoch_kl[e]);
      sink(rec);
    }
  }
  summary.steps = step;
  return summary;
}

}  // namespace farm
