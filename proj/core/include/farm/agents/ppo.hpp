#pragma once

#include <vector>

#include "farm/agents/agent.hpp"
#include "farm/agents/environment.hpp"
#include "farm/agents/policy_net.hpp"
#include "farm/neural/adam.hpp"

namespace farm {

enum class TrustRegion { clip, pid_kl };

struct PidKlState {
  double c_kl = 1.0;
  double target_kl = 0.01;
  double kp = 1.0;
  double ki = 0.05;
  double kd = 0.25;
  double integral = 0.0;
  double prev_error = 0.0;
};

/// e = measured - target; I += e; D = e - e_prev;
/// c_kl = max(0, c_kl + Kp e + Ki I + Kd D)
void pid_kl_update(PidKlState& state, double measured_kl);

struct PpoConfig {
  double lr = 2.5e-4;
  double gamma = 0.99;
  double clip = 0.1;
  std::size_t minibatch = 128;
  long total_steps = 1'000'000;
  std::size_t rollout_len = 1024;
  int epochs = 4;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double grad_clip = 0.5;
  double target_kl = 0.015;  // early-stop threshold is 1.5x this in clip mode
  bool anneal_lr = false;
  TrustRegion trust = TrustRegion::clip;
  PidKlState pid;

  static PpoConfig heater();
  static PpoConfig battery();
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct Trajectory {
  std::vector<std::vector<double>> obs;
  std::vector<std::size_t> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<bool> dones;  // episode ended after this step

  std::size_t size() const { return rewards.size(); }
  void clear();
};

struct Advantages {
  std::vector<double> advantages;  // raw, not normalised
  std::vector<double> returns;     // advantages + values
};

/// `bootstrap_value` is V of the state after the last step; it is ignored
/// when that step ended an episode.
Advantages gae_advantages(const Trajectory& traj, double gamma, double lambda,
                          double bootstrap_value);

/// min(ratio A, clip(ratio, 1 - delta, 1 + delta) A)
double ppo_surrogate(double ratio, double advantage, double delta);
/// Negated surrogate, for minimisation.
double ppo_clip_loss(double ratio, double advantage, double delta);

struct PpoUpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl_penalty = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;  // measured after the last epoch run
  int epochs_run = 0;
  double c_kl = 0.0;
  std::vector<double> epoch_kl;
};

/// Minibatch epochs on one rollout. In pid_kl mode the loss adds
/// c_kl * KL(pi_old || pi_new) and `pid` is updated after every epoch;
/// in clip mode the update stops once the measured KL exceeds 1.5 target_kl.
PpoUpdateStats ppo_update(ActorCritic& net, nn::Adam& opt, const Trajectory& traj,
                          const Advantages& adv, const PpoConfig& config, PidKlState* pid,
                          Rng& rng);

struct PpoArch {
  EncoderSpec encoder;
  bool shared = false;
};

class PpoAgent : public Agent {
 public:
  PpoAgent(ObservationLayout layout, std::size_t actions, PpoConfig config, PpoArch arch,
           std::uint64_t seed);

  TrainSummary train(DiscreteEnv& env, const StatsSink& sink = {});
  std::size_t act(const std::vector<double>& obs) override;
  /// Action probabilities in evaluation mode.
  nn::Vector probabilities(const std::vector<double>& obs) const;
  nn::ParamList params() override { return net_.params(); }

  ActorCritic& net() { return net_; }
  nn::Adam& optimizer() { return opt_; }
  PpoConfig& config() { return config_; }
  const PidKlState& pid() const { return config_.pid; }

 private:
  PpoConfig config_;
  Rng rng_;
  ActorCritic net_;
  nn::Adam opt_;
};

}  // namespace farm
