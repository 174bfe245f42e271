#include "farm/neural/categorical.hpp"

#include <cmath>

#include "farm/errors.hpp"

namespace farm::nn {

Matrix log_softmax(const Matrix& logits) {
  if (logits.rows() < 2) throw ShapeError("a categorical head needs at least two logits");
  if (!logits.allFinite()) throw NumericsError("non-finite logits");
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

Matrix softmax(const Matrix& logits) { return log_softmax(logits).array().exp().matrix(); }

Vector entropy(const Matrix& log_probs) {
  Vector h(log_probs.cols());
  for (Eigen::Index j = 0; j < log_probs.cols(); ++j)
    h(j) = -(log_probs.col(j).array().exp() * log_probs.col(j).array()).sum();
  return h;
}

CategoricalSample sample_categorical(const Vector& logits, Rng& rng) {
  const Matrix lp = log_softmax(logits);
  const Vector p = lp.col(0).array().exp();
  CategoricalSample s;
  s.action = rng.categorical(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
  s.log_prob = lp(static_cast<Eigen::Index>(s.action), 0);
  s.entropy = entropy(lp)(0);
  return s;
}

std::size_t argmax(const Vector& values) {
  Eigen::Index best = 0;
  values.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

Vector kl_divergence(const Matrix& log_p_old, const Matrix& log_p_new) {
  return (log_p_old.array().exp() * (log_p_old - log_p_new).array()).colwise().sum().transpose();
}

Matrix grad_log_prob(const Matrix& probs, const std::vector<std::size_t>& actions,
                     const Vector& w) {
  Matrix g = -probs;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    g(static_cast<Eigen::Index>(actions[static_cast<std::size_t>(j)]), j) += 1.0;
    g.col(j) *= w(j);
  }
  return g;
}

Matrix grad_entropy(const Matrix& probs, const Matrix& log_probs, const Vector& w) {
  const Vector h = entropy(log_probs);
  Matrix g(probs.rows(), probs.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j)
    g.col(j) = -w(j) * (probs.col(j).array() * (log_probs.col(j).array() + h(j)));
  return g;
}

Matrix grad_kl(const Matrix& p_old, const Matrix& p_new, const Vector& w) {
  Matrix g = p_new - p_old;
  for (Eigen::Index j = 0; j < g.cols(); ++j) g.col(j) *= w(j);
  return g;
}

}  // namespace farm::nn
