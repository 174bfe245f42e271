#pragma once

#include "farm/neural/param.hpp"

namespace farm::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. step() zeroes the gradients afterwards.
class Adam {
 public:
  Adam(ParamList params, AdamConfig config);

  /// Throws NumericsError, leaving every parameter untouched, when a gradient
  /// or an updated value is not finite.
  void step();
  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }
  long steps() const { return t_; }
  const ParamList& params() const { return params_; }

 private:
  ParamList params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(const ParamList& params, double max_norm);

/// Throws NumericsError naming the first parameter with a non-finite value or gradient.
void check_finite(const ParamList& params, const char* where);

}  // namespace farm::nn
