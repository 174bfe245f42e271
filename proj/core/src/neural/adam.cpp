#include "farm/neural/adam.hpp"

#include <cmath>

#include "farm/errors.hpp"

namespace farm::nn {

Adam::Adam(ParamList params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (const Param* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  check_finite(params_, "Adam step (gradients)");
  for (const Param* p : params_)
    if (!p->grad.allFinite()) throw NumericsError("non-finite gradient in " + p->name);
  const long t = t_ + 1;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));

  std::vector<Matrix> m_next(params_.size());
  std::vector<Matrix> v_next(params_.size());
  std::vector<Matrix> values(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Param& p = *params_[i];
    m_next[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_next[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    values[i] = p.value.array() - config_.lr * (m_next[i].array() / c1) /
                                      ((v_next[i].array() / c2).sqrt() + config_.eps);
    if (!values[i].allFinite()) throw NumericsError("Adam update made " + p.name + " non-finite");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    params_[i]->value = std::move(values[i]);
    params_[i]->zero_grad();
    m_[i] = std::move(m_next[i]);
    v_[i] = std::move(v_next[i]);
  }
  t_ = t;
}

double clip_grad_norm(const ParamList& params, double max_norm) {
  double sq = 0.0;
  for (const Param* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / (norm + 1e-6);
    for (Param* p : params) p->grad *= scale;
  }
  return norm;
}

void check_finite(const ParamList& params, const char* where) {
  for (const Param* p : params) {
    if (!p->value.allFinite())
      throw NumericsError(std::string(where) + ": non-finite value in " + p->name);
    if (!p->grad.allFinite())
      throw NumericsError(std::string(where) + ": non-finite gradient in " + p->name);
  }
}

}  // namespace farm::nn
