#pragma once

#include <span>

#include "farm/agents/agent.hpp"
#include "farm/agents/environment.hpp"
#include "farm/agents/policy_net.hpp"
#include "farm/agents/replay.hpp"
#include "farm/neural/adam.hpp"

namespace farm {

struct DqnConfig {
  double lr = 2.5e-4;
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.5;
  std::size_t buffer = 10'000;
  std::size_t batch = 128;
  long total_steps = 1'000'000;
  long target_sync_steps = 500;
  long learning_starts = 10'000;
  long train_frequency = 10;

  void validate() const;
};

/// done ? r : r + gamma * max(next_q)
double dqn_target(double reward, double gamma, std::span<const double> next_q, bool done);

/// Linear decay from eps_start to eps_end over eps_decay_fraction * total_steps.
double dqn_epsilon(const DqnConfig& config, long step);

class DqnAgent : public Agent {
 public:
  DqnAgent(ObservationLayout layout, std::size_t actions, DqnConfig config, EncoderSpec encoder,
           std::uint64_t seed);

  TrainSummary train(DiscreteEnv& env, const StatsSink& sink = {});
  std::size_t act(const std::vector<double>& obs) override;
  nn::Vector q_values(const std::vector<double>& obs) const;
  nn::ParamList params() override { return q_.params(); }
  const ReplayBuffer& buffer() const { return buffer_; }

 private:
  double update();

  DqnConfig config_;
  std::size_t actions_;
  Rng rng_;
  HeadNet q_;
  HeadNet target_;
  nn::Adam opt_;
  ReplayBuffer buffer_;
};

}  // namespace farm
