#pragma once

#include <array>
#include <vector>

#include "farm/agents/agent.hpp"
#include "farm/agents/environment.hpp"
#include "farm/battery_env.hpp"
#include "farm/rng.hpp"

namespace farm {

struct TabularStep {
  std::size_t state = 0;
  double reward = 0.0;
  bool done = false;
};

/// Environment with a finite, enumerable state space.
class TabularEnv {
 public:
  virtual ~TabularEnv() = default;
  virtual std::size_t state_count() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::size_t reset(Rng& rng) = 0;
  virtual TabularStep step(std::size_t action) = 0;
};

struct QTableConfig {
  double lr = 0.1;
  double gamma = 0.89;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decrement = 1e-4;  // per step
  long total_steps = 200'000;

  void validate() const;
};

class QTableAgent {
 public:
  QTableAgent(std::size_t states, std::size_t actions, QTableConfig config, std::uint64_t seed);

  TrainSummary train(TabularEnv& env, const StatsSink& sink = {});
  /// Greedy action; ties go to the lowest index.
  std::size_t act(std::size_t state) const;
  double q(std::size_t state, std::size_t action) const { return table_[state * actions_ + action]; }
  double epsilon(long step) const;
  const std::vector<double>& table() const { return table_; }
  std::vector<double>& table() { return table_; }
  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

 private:
  QTableConfig config_;
  std::size_t states_;
  std::size_t actions_;
  Rng rng_;
  std::vector<double> table_;
};

/// Key = hour (24) x soc level (11) x load bin (4) x pv bin (4).
/// Load bins are training-month quartiles; pv bin 0 means no generation and
/// bins 1..3 are tertiles of the positive training-month generation.
struct BatteryDiscretizer {
  std::array<double, 3> load_edges{};
  std::array<double, 2> pv_edges{};

  static constexpr std::size_t kStates = 24 * 11 * 4 * 4;
  static BatteryDiscretizer fit(const TimeSeriesYear& year, const std::set<int>& train_months);
  std::size_t key(const BatteryState& state) const;
  std::size_t load_bin(double load_kw) const;
  std::size_t pv_bin(double pv_kw) const;
};

/// BatteryEnv seen through the discretizer.
class BatteryTabularEnv : public TabularEnv {
 public:
  BatteryTabularEnv(BatteryEnv& env, BatteryDiscretizer disc) : env_(env), disc_(disc) {}
  std::size_t state_count() const override { return BatteryDiscretizer::kStates; }
  std::size_t action_count() const override { return kBatteryActionCount; }
  std::size_t reset(Rng& rng) override;
  TabularStep step(std::size_t action) override;

 private:
  BatteryEnv& env_;
  BatteryDiscretizer disc_;
};

}  // namespace farm
