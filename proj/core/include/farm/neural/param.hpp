#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "farm/rng.hpp"

namespace farm::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A named trainable tensor and its gradient. Vectors are stored as one column.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);

/// Orthogonal initialisation scaled by `gain` (QR of a Gaussian matrix).
void orthogonal_init(Matrix& w, double gain, Rng& rng);

/// Copies values between two lists with identical names and shapes.
void copy_values(const ParamList& from, const ParamList& to);

/// target <- tau * source + (1 - tau) * target
void polyak_update(const ParamList& source, const ParamList& target, double tau);

std::size_t parameter_count(const ParamList& params);

}  // namespace farm::nn
