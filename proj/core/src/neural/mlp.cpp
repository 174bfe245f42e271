#include "farm/neural/mlp.hpp"

#include "farm/errors.hpp"

namespace farm::nn {

namespace {

// tanh(x) = 2 / (1 + exp(-2x)) - 1
void tanh_inplace(Matrix& y) { y.array() = 2.0 / (1.0 + (-2.0 * y.array()).exp()) - 1.0; }

}  // namespace

Mlp::Mlp(const std::string& name, MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.widths.size() < 2) throw ShapeError(name + ": an MLP needs input and output widths");
  for (std::size_t i = 0; i + 1 < spec_.widths.size(); ++i)
    layers_.emplace_back(name + "." + std::to_string(i), spec_.widths[i], spec_.widths[i + 1]);
}

bool Mlp::activated(std::size_t layer) const {
  return layer + 1 < layers_.size() || spec_.activate_output;
}

void Mlp::init(Rng& rng) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool last = i + 1 == layers_.size();
    layers_[i].init(last && !spec_.activate_output ? spec_.output_gain : spec_.hidden_gain, rng);
  }
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix y = layers_[i].forward(h);
    if (activated(i)) tanh_inplace(y);
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->outputs.push_back(y);
    }
    h = std::move(y);
  }
  return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& dy) {
  if (cache.inputs.size() != layers_.size()) throw ShapeError("MLP backward without a forward cache");
  Matrix grad = dy;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (activated(k)) grad = (grad.array() * (1.0 - cache.outputs[k].array().square())).matrix();
    grad = layers_[k].backward(cache.inputs[k], grad);
  }
  return grad;
}

ParamList Mlp::params() {
  ParamList out;
  for (auto& l : layers_) {
    out.push_back(&l.weight());
    out.push_back(&l.bias());
  }
  return out;
}

}  // namespace farm::nn
