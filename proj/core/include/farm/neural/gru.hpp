#pragma once

#include <vector>

#include "farm/neural/param.hpp"

namespace farm::nn {

struct GruSpec {
  Eigen::Index input_size = 2;
  Eigen::Index hidden_size = 32;
  double dropout_rate = 0.10;
};

/// Single-layer GRU with gate order (reset, update, new):
///   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
///   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
/// encode() returns the last hidden state, with inverted dropout in training mode.
class Gru {
 public:
  struct Cache {
    std::vector<Matrix> h;      // h[0] = initial state, h[t + 1] after step t
    std::vector<Matrix> r, z, n;
    std::vector<Matrix> hn;     // W_hn h + b_hn
    Matrix x;                   // inputs side by side, step t in columns [t * batch, (t + 1) * batch)
    Matrix mask;                // dropout mask (already scaled), empty when off
  };

  Gru() = default;
  Gru(const std::string& name, GruSpec spec);

  void init(Rng& rng);
  /// `sequence[t]` is input_size x batch. `rng` is needed only in training mode.
  Matrix encode(const std::vector<Matrix>& sequence, bool training, Rng* rng,
                Cache* cache = nullptr) const;
  /// Accumulates parameter gradients; returns dL/dx for every step.
  std::vector<Matrix> backward(const Cache& cache, const Matrix& d_out);

  const GruSpec& spec() const { return spec_; }
  ParamList params() { return {&w_ih_, &w_hh_, &b_ih_, &b_hh_}; }

 private:
  GruSpec spec_;
  Param w_ih_;  // 3H x I
  Param w_hh_;  // 3H x H
  Param b_ih_;  // 3H x 1
  Param b_hh_;  // 3H x 1
};

}  // namespace farm::nn
