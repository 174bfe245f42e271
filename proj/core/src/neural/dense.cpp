#include "farm/neural/dense.hpp"

#include <cmath>

#include "farm/errors.hpp"

namespace farm::nn {

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

void orthogonal_init(Matrix& w, double gain, Rng& rng) {
  const Eigen::Index rows = w.rows();
  const Eigen::Index cols = w.cols();
  const bool tall = rows >= cols;
  Matrix a(tall ? rows : cols, tall ? cols : rows);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  w = gain * (tall ? q : Matrix(q.transpose()));
}

void copy_values(const ParamList& from, const ParamList& to) {
  if (from.size() != to.size()) throw ShapeError("parameter lists differ in length");
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i]->value.rows() != to[i]->value.rows() ||
        from[i]->value.cols() != to[i]->value.cols())
      throw ShapeError("shape mismatch copying " + from[i]->name);
    to[i]->value = from[i]->value;
  }
}

void polyak_update(const ParamList& source, const ParamList& target, double tau) {
  if (source.size() != target.size()) throw ShapeError("parameter lists differ in length");
  for (std::size_t i = 0; i < source.size(); ++i)
    target[i]->value = tau * source[i]->value + (1.0 - tau) * target[i]->value;
}

std::size_t parameter_count(const ParamList& params) {
  std::size_t n = 0;
  for (const Param* p : params) n += static_cast<std::size_t>(p->size());
  return n;
}

Dense::Dense(const std::string& name, Eigen::Index in, Eigen::Index out)
    : w_(name + ".weight", out, in), b_(name + ".bias", out, 1) {}

void Dense::init(double gain, Rng& rng) {
  orthogonal_init(w_.value, gain, rng);
  b_.value.setZero();
}

Matrix Dense::forward(const Matrix& x) const {
  if (x.rows() != in_size())
    throw ShapeError(w_.name + ": expected input width " + std::to_string(in_size()) + ", got " +
                     std::to_string(x.rows()));
  Matrix y = w_.value * x;
  y.colwise() += b_.value.col(0);
  return y;
}

Matrix Dense::backward(const Matrix& x, const Matrix& dy) {
  w_.grad.noalias() += dy * x.transpose();
  b_.grad.col(0) += dy.rowwise().sum();
  return w_.value.transpose() * dy;
}

}  // namespace farm::nn
