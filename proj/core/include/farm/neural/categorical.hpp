#pragma once

#include "farm/neural/param.hpp"

namespace farm::nn {

/// Column-wise log-softmax of a K x batch logit matrix. Throws NumericsError
/// on non-finite logits.
Matrix log_softmax(const Matrix& logits);
Matrix softmax(const Matrix& logits);

/// Entropy per column, from log-probabilities.
Vector entropy(const Matrix& log_probs);

struct CategoricalSample {
  std::size_t action = 0;
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// Samples one action from a single column of logits.
CategoricalSample sample_categorical(const Vector& logits, Rng& rng);
std::size_t argmax(const Vector& values);

/// KL(p_old || p_new) per column given both log-probability matrices.
Vector kl_divergence(const Matrix& log_p_old, const Matrix& log_p_new);

/// Gradients with respect to the logits (K x batch), scaled per column by `w`.
/// d log p(a) / d logits = onehot(a) - p
Matrix grad_log_prob(const Matrix& probs, const std::vector<std::size_t>& actions,
                     const Vector& w);
/// d H / d logits = -p (log p + H)
Matrix grad_entropy(const Matrix& probs, const Matrix& log_probs, const Vector& w);
/// d KL(p_old || p_new) / d logits_new = p_new - p_old
Matrix grad_kl(const Matrix& p_old, const Matrix& p_new, const Vector& w);

}  // namespace farm::nn
