#include "farm/neural/gru.hpp"

#include <cmath>

#include "farm/errors.hpp"

namespace farm::nn {

namespace {

template <typename A>
void sigmoid_inplace(A&& x) {
  x = 1.0 / (1.0 + (-x).exp());
}

}  // namespace

Gru::Gru(const std::string& name, GruSpec spec)
    : spec_(spec),
      w_ih_(name + ".w_ih", 3 * spec.hidden_size, spec.input_size),
      w_hh_(name + ".w_hh", 3 * spec.hidden_size, spec.hidden_size),
      b_ih_(name + ".b_ih", 3 * spec.hidden_size, 1),
      b_hh_(name + ".b_hh", 3 * spec.hidden_size, 1) {
  if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
    throw ShapeError(name + ": dropout rate must lie in [0, 1)");
}

void Gru::init(Rng& rng) {
  const Eigen::Index h = spec_.hidden_size;
  // Each gate block gets its own orthogonal matrix.
  for (Eigen::Index g = 0; g < 3; ++g) {
    Matrix wi(h, spec_.input_size);
    orthogonal_init(wi, 1.0, rng);
    w_ih_.value.middleRows(g * h, h) = wi;
    Matrix wh(h, h);
    orthogonal_init(wh, 1.0, rng);
    w_hh_.value.middleRows(g * h, h) = wh;
  }
  b_ih_.value.setZero();
  b_hh_.value.setZero();
}

Matrix Gru::encode(const std::vector<Matrix>& sequence, bool training, Rng* rng,
                   Cache* cache) const {
  if (sequence.empty()) throw ShapeError("GRU input sequence is empty");
  const Eigen::Index hs = spec_.hidden_size;
  const Eigen::Index batch = sequence.front().cols();
  const auto steps = static_cast<Eigen::Index>(sequence.size());

  Matrix x_all(spec_.input_size, steps * batch);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Matrix& x = sequence[static_cast<std::size_t>(t)];
    if (x.rows() != spec_.input_size || x.cols() != batch)
      throw ShapeError("GRU step input has the wrong shape");
    x_all.middleCols(t * batch, batch) = x;
  }
  Matrix gi_all = w_ih_.value * x_all;
  gi_all.colwise() += b_ih_.value.col(0);

  Matrix h = Matrix::Zero(hs, batch);
  if (cache) {
    *cache = Cache{};
    cache->h.reserve(sequence.size() + 1);
    cache->r.reserve(sequence.size());
    cache->z.reserve(sequence.size());
    cache->n.reserve(sequence.size());
    cache->hn.reserve(sequence.size());
    cache->h.push_back(h);
  }
  Matrix gh(3 * hs, batch);
  Matrix r(hs, batch);
  Matrix z(hs, batch);
  Matrix n(hs, batch);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto gi = gi_all.middleCols(t * batch, batch);
    gh.noalias() = w_hh_.value * h;
    gh.colwise() += b_hh_.value.col(0);
    r.array() = gi.topRows(hs).array() + gh.topRows(hs).array();
    sigmoid_inplace(r.array());
    z.array() = gi.middleRows(hs, hs).array() + gh.middleRows(hs, hs).array();
    sigmoid_inplace(z.array());
    // tanh(x) = 2 sigmoid(2x) - 1
    n.array() = 2.0 * (gi.bottomRows(hs).array() + r.array() * gh.bottomRows(hs).array());
    sigmoid_inplace(n.array());
    n.array() = 2.0 * n.array() - 1.0;
    h.array() = n.array() + z.array() * (h.array() - n.array());
    if (cache) {
      cache->r.push_back(r);
      cache->z.push_back(z);
      cache->n.push_back(n);
      cache->hn.push_back(gh.bottomRows(hs));
      cache->h.push_back(h);
    }
  }
  if (cache) cache->x = std::move(x_all);
  if (training && spec_.dropout_rate > 0.0) {
    if (!rng) throw ShapeError("GRU dropout in training mode needs a generator");
    const double keep = 1.0 - spec_.dropout_rate;
    Matrix mask(hs, batch);
    for (Eigen::Index j = 0; j < batch; ++j)
      for (Eigen::Index i = 0; i < hs; ++i) mask(i, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    h.array() *= mask.array();
    if (cache) cache->mask = std::move(mask);
  }
  return h;
}

std::vector<Matrix> Gru::backward(const Cache& cache, const Matrix& d_out) {
  const Eigen::Index hs = spec_.hidden_size;
  const std::size_t steps = cache.r.size();
  if (steps == 0) throw ShapeError("GRU backward without a forward cache");
  Matrix dh = cache.mask.size() ? Matrix((d_out.array() * cache.mask.array()).matrix()) : d_out;
  const Eigen::Index batch = dh.cols();
  Matrix dgi_all(3 * hs, static_cast<Eigen::Index>(steps) * batch);
  Matrix dgh(3 * hs, batch);
  Matrix dh_prev(hs, batch);
  for (std::size_t t = steps; t-- > 0;) {
    const auto r = cache.r[t].array();
    const auto z = cache.z[t].array();
    const auto n = cache.n[t].array();
    const auto h_prev = cache.h[t].array();
    auto dgi = dgi_all.middleCols(static_cast<Eigen::Index>(t) * batch, batch);

    // dn_pre, dr_pre, dz_pre go straight into the gate-gradient blocks.
    dgi.bottomRows(hs).array() = dh.array() * (1.0 - z) * (1.0 - n.square());
    dgi.topRows(hs).array() = dgi.bottomRows(hs).array() * cache.hn[t].array() * r * (1.0 - r);
    dgi.middleRows(hs, hs).array() = dh.array() * (h_prev - n) * z * (1.0 - z);
    dgh.topRows(2 * hs) = dgi.topRows(2 * hs);
    dgh.bottomRows(hs).array() = dgi.bottomRows(hs).array() * r;

    w_hh_.grad.noalias() += dgh * cache.h[t].transpose();
    b_hh_.grad.col(0) += dgh.rowwise().sum();

    dh_prev.array() = dh.array() * z;
    dh_prev.noalias() += w_hh_.value.transpose() * dgh;
    dh.swap(dh_prev);
  }
  w_ih_.grad.noalias() += dgi_all * cache.x.transpose();
  b_ih_.grad.col(0) += dgi_all.rowwise().sum();
  const Matrix dx_all = w_ih_.value.transpose() * dgi_all;
  std::vector<Matrix> dx(steps);
  for (std::size_t t = 0; t < steps; ++t)
    dx[t] = dx_all.middleCols(static_cast<Eigen::Index>(t) * batch, batch);
  return dx;
}

}  // namespace farm::nn
