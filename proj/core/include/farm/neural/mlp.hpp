#pragma once

#include <vector>

#include "farm/neural/dense.hpp"

namespace farm::nn {

/// Layer widths including input and output, e.g. {5, 64, 64, 3}.
struct MlpSpec {
  std::vector<Eigen::Index> widths;
  bool activate_output = false;  // tanh on the last layer too (encoder trunks)
  double hidden_gain = 1.4142135623730951;
  double output_gain = 1.0;
};

class Mlp {
 public:
  struct Cache {
    std::vector<Matrix> inputs;   // input of each layer
    std::vector<Matrix> outputs;  // post-activation output of each layer
  };

  Mlp() = default;
  Mlp(const std::string& name, MlpSpec spec);

  void init(Rng& rng);
  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
  /// Needs the cache of the matching forward call; returns dL/dx.
  Matrix backward(const Cache& cache, const Matrix& dy);

  Eigen::Index in_size() const { return spec_.widths.front(); }
  Eigen::Index out_size() const { return spec_.widths.back(); }
  const MlpSpec& spec() const { return spec_; }
  ParamList params();

 private:
  bool activated(std::size_t layer) const;

  MlpSpec spec_;
  std::vector<Dense> layers_;
};

}  // namespace farm::nn
