#pragma once

#include <span>

#include "farm/agents/agent.hpp"
#include "farm/agents/environment.hpp"
#include "farm/agents/policy_net.hpp"
#include "farm/agents/replay.hpp"
#include "farm/neural/adam.hpp"

namespace farm {

struct SacConfig {
  double lr = 3e-4;
  double gamma = 0.99;
  std::size_t buffer = 4000;
  std::size_t batch = 256;
  double tau = 0.005;
  double target_entropy_scale = 0.5;  // target entropy = scale * log|A|
  double gru_dropout = 0.10;
  long total_steps = 1'000'000;
  long learning_starts = 2000;
  long update_frequency = 4;
  double initial_alpha = 1.0;
  bool autotune = true;

  void validate() const;
};

/// sum_a pi(a) (min(q1, q2)(a) - alpha log pi(a))
double sac_soft_value(std::span<const double> probs, std::span<const double> q1,
                      std::span<const double> q2, double alpha);
/// sum_a pi(a) (alpha log pi(a) - min(q1, q2)(a))
double sac_actor_loss(std::span<const double> probs, std::span<const double> q1,
                      std::span<const double> q2, double alpha);

/// Gradient of sac_actor_loss with respect to the logits:
/// p_k (g_k - sum_a p_a g_a), g = alpha log p - min(q1, q2).
nn::Vector sac_actor_logit_grad(const nn::Vector& probs, const nn::Vector& log_probs,
                                const nn::Vector& q_min, double alpha);

class SacAgent : public Agent {
 public:
  SacAgent(ObservationLayout layout, std::size_t actions, SacConfig config, EncoderSpec encoder,
           std::uint64_t seed);

  TrainSummary train(DiscreteEnv& env, const StatsSink& sink = {});
  std::size_t act(const std::vector<double>& obs) override;
  nn::Vector probabilities(const std::vector<double>& obs) const;
  nn::ParamList params() override;
  double alpha() const;
  double target_entropy() const;

 private:
  struct UpdateStats {
    double q_loss = 0.0;
    double actor_loss = 0.0;
    double entropy = 0.0;
  };
  UpdateStats update();

  SacConfig config_;
  std::size_t actions_;
  Rng rng_;
  HeadNet actor_;
  HeadNet q1_;
  HeadNet q2_;
  HeadNet q1_target_;
  HeadNet q2_target_;
  nn::Param log_alpha_;
  nn::Adam actor_opt_;
  nn::Adam q_opt_;
  nn::Adam alpha_opt_;
  ReplayBuffer buffer_;
};

}  // namespace farm
