#pragma once

#include <functional>

#include "farm/neural/param.hpp"

namespace farm::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = 0;
  std::size_t checked = 0;
};

/// Compares analytic gradients with central finite differences.
///
/// `loss` evaluates the scalar objective from the current parameter values.
/// `backward` zeroes and fills every `grad`. Relative error per element is
/// |a - n| / (|a| + |n| + 1e-10).
GradCheckResult grad_check(const std::function<double()>& loss,
                           const std::function<void()>& backward, const ParamList& params,
                           double step = 1e-5);

}  // namespace farm::nn
