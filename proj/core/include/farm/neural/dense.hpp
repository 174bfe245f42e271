#pragma once

#include "farm/neural/param.hpp"

namespace farm::nn {

/// y = W x + b for a batch stored column-wise (features x batch).
class Dense {
 public:
  Dense() = default;
  Dense(const std::string& name, Eigen::Index in, Eigen::Index out);

  void init(double gain, Rng& rng);
  Matrix forward(const Matrix& x) const;
  /// Accumulates dW, db and returns dL/dx.
  Matrix backward(const Matrix& x, const Matrix& dy);

  Eigen::Index in_size() const { return w_.value.cols(); }
  Eigen::Index out_size() const { return w_.value.rows(); }
  Param& weight() { return w_; }
  Param& bias() { return b_; }
  ParamList params() { return {&w_, &b_}; }

 private:
  Param w_;
  Param b_;
};

}  // namespace farm::nn
