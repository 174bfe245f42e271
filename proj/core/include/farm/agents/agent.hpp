#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "farm/neural/param.hpp"

namespace farm {

/// One line of the training log.
struct StatsRecord {
  std::string kind;  // "update" or "episode"
  long step = 0;
  std::vector<std::pair<std::string, double>> fields;
};

using StatsSink = std::function<void(const StatsRecord&)>;

struct TrainSummary {
  std::vector<double> episode_returns;
  std::vector<double> epoch_kls;  // PPO family only
  long steps = 0;
  long updates = 0;
};

/// A trained policy that can be queried greedily.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::size_t act(const std::vector<double>& obs) = 0;
  /// Parameters saved in checkpoints, in a fixed order.
  virtual nn::ParamList params() = 0;
};

}  // namespace farm
