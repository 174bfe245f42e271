#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "farm/errors.hpp"
#include "farm/neural/adam.hpp"
#include "farm/neural/categorical.hpp"
#include "farm/neural/checkpoint.hpp"
#include "farm/neural/dense.hpp"
#include "grad_cases.hpp"

using namespace farm;
using namespace farm::nn;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "farm_neural_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

class GradCheck : public ::testing::TestWithParam<gradcase::NamedCase> {};

TEST_P(GradCheck, AnalyticMatchesFiniteDifferences) {
  const auto& c = GetParam();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = c.run(seed);
    EXPECT_GT(r.checked, 0u);
    EXPECT_LT(r.max_rel_error, 1e-4) << c.name << " seed " << seed << " worst " << r.worst_param
                                     << "[" << r.worst_index << "]";
  }
}

INSTANTIATE_TEST_SUITE_P(Networks, GradCheck, ::testing::ValuesIn(gradcase::all_cases()),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Dense, ForwardAndBackward) {
  Dense d("d", 2, 1);
  d.weight().value << 2.0, -1.0;
  d.bias().value << 0.5;
  Matrix x(2, 1);
  x << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(d.forward(x)(0, 0), 2.5);
  Matrix dy(1, 1);
  dy << 1.0;
  const Matrix dx = d.backward(x, dy);
  EXPECT_DOUBLE_EQ(dx(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(dx(1, 0), -1.0);
  EXPECT_DOUBLE_EQ(d.weight().grad(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(d.bias().grad(0, 0), 1.0);
}

TEST(Init, OrthogonalRowsOrColumns) {
  Rng rng(3);
  Matrix w(4, 7);
  orthogonal_init(w, 2.0, rng);
  EXPECT_TRUE((w * w.transpose()).isApprox(4.0 * Matrix::Identity(4, 4), 1e-10));
  Matrix t(7, 4);
  orthogonal_init(t, 1.0, rng);
  EXPECT_TRUE((t.transpose() * t).isApprox(Matrix::Identity(4, 4), 1e-10));
}

TEST(Params, PolyakAndCopy) {
  Param a("p", 2, 2), b("p", 2, 2);
  a.value.setConstant(1.0);
  b.value.setConstant(3.0);
  polyak_update({&a}, {&b}, 0.25);
  EXPECT_DOUBLE_EQ(b.value(1, 1), 2.5);
  copy_values({&a}, {&b});
  EXPECT_EQ(b.value, a.value);
  EXPECT_EQ(parameter_count({&a, &b}), 8u);
  Param c("p", 3, 2);
  EXPECT_THROW(copy_values({&a}, {&c}), ShapeError);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Param p("p", 2, 1);
  p.value << 1.0, -1.0;
  Adam opt({&p}, AdamConfig{0.1});
  p.grad << 3.0, -0.5;
  opt.step();
  EXPECT_NEAR(p.value(0), 0.9, 1e-7);
  EXPECT_NEAR(p.value(1), -0.9, 1e-7);
  EXPECT_EQ(p.grad.squaredNorm(), 0.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(AdamTest, NonFiniteGradientLeavesParamsUntouched) {
  Param p("p", 2, 1);
  p.value << 1.0, 2.0;
  Adam opt({&p}, AdamConfig{});
  p.grad << 1.0, std::nan("");
  EXPECT_THROW(opt.step(), NumericsError);
  EXPECT_EQ(p.value(0), 1.0);
  EXPECT_EQ(p.value(1), 2.0);
}

TEST(AdamTest, MinimisesQuadratic) {
  Param p("p", 3, 1);
  p.value << 5.0, -3.0, 2.0;
  Adam opt({&p}, AdamConfig{0.05});
  for (int i = 0; i < 2000; ++i) {
    p.grad = 2.0 * p.value;
    opt.step();
  }
  EXPECT_LT(p.value.norm(), 1e-2);
}

TEST(ClipGradNorm, RescalesToMax) {
  Param a("a", 1, 1), b("b", 1, 1);
  a.grad << 3.0;
  b.grad << 4.0;
  EXPECT_DOUBLE_EQ(clip_grad_norm({&a, &b}, 1.0), 5.0);
  EXPECT_NEAR(a.grad(0) * a.grad(0) + b.grad(0) * b.grad(0), 1.0, 1e-6);
  const double before = a.grad(0);
  EXPECT_NEAR(clip_grad_norm({&a, &b}, 2.0), 1.0, 1e-6);
  EXPECT_EQ(a.grad(0), before);
  EXPECT_NEAR(a.grad(0), 0.6, 1e-6);
}

TEST(Categorical, SoftmaxAndEntropy) {
  Matrix logits(3, 2);
  logits << 0, 1000, 0, 0, 0, -1000;
  const Matrix p = softmax(logits);
  EXPECT_NEAR(p(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p(0, 1), 1.0, 1e-15);
  const Vector h = entropy(log_softmax(logits));
  EXPECT_NEAR(h(0), std::log(3.0), 1e-12);
  EXPECT_NEAR(h(1), 0.0, 1e-12);
  logits(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(log_softmax(logits), NumericsError);
}

TEST(Categorical, KlIsZeroOnlyForEqualDistributions) {
  Rng rng(8);
  const Matrix a = gradcase::random_matrix(4, 6, rng), b = gradcase::random_matrix(4, 6, rng);
  const Vector same = kl_divergence(log_softmax(a), log_softmax(a));
  const Vector diff = kl_divergence(log_softmax(a), log_softmax(b));
  for (Index j = 0; j < 6; ++j) {
    EXPECT_NEAR(same(j), 0.0, 1e-14);
    EXPECT_GT(diff(j), 0.0);
  }
}

TEST(Categorical, SamplingFrequencies) {
  Rng rng(12);
  Vector logits(3);
  logits << std::log(0.2), std::log(0.3), std::log(0.5);
  std::array<int, 3> counts{};
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[sample_categorical(logits, rng).action];
  EXPECT_NEAR(counts[0] / double(n), 0.2, 0.015);
  EXPECT_NEAR(counts[2] / double(n), 0.5, 0.015);
  Vector v(3);
  v << 1.0, 3.0, 3.0;
  EXPECT_EQ(argmax(v), 1u);
}

TEST(Categorical, LogitGradientsMatchFiniteDifferences) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Param z("z", 4, 3);
    z.value = gradcase::random_matrix(4, 3, rng);
    const Matrix p_old = softmax(gradcase::random_matrix(4, 3, rng));
    const std::vector<std::size_t> actions{rng.below(4), rng.below(4), rng.below(4)};
    const Vector w = gradcase::random_matrix(3, 1, rng);
    auto loss = [&] {
      const Matrix lp = log_softmax(z.value);
      const Vector h = entropy(lp), kl = kl_divergence(p_old.array().log().matrix(), lp);
      double l = 0.0;
      for (Index j = 0; j < 3; ++j)
        l += w(j) * (lp(static_cast<Index>(actions[j]), j) + h(j) + kl(j));
      return l;
    };
    auto backward = [&] {
      const Matrix lp = log_softmax(z.value);
      const Matrix p = lp.array().exp().matrix();
      z.grad = grad_log_prob(p, actions, w) + grad_entropy(p, lp, w) + grad_kl(p_old, p, w);
    };
    EXPECT_LT(grad_check(loss, backward, {&z}).max_rel_error, 1e-4);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(5);
  Param a("layer.w", 3, 4), b("layer.b", 3, 1);
  a.value = gradcase::random_matrix(3, 4, rng);
  b.value = gradcase::random_matrix(3, 1, rng);
  const auto path = temp_path("round.ckpt");
  save_checkpoint(path, {&a, &b}, 77);
  EXPECT_TRUE(std::filesystem::exists(path.string() + ".manifest"));
  EXPECT_EQ(read_checkpoint_hash(path), 77u);
  Param a2("layer.w", 3, 4), b2("layer.b", 3, 1);
  load_checkpoint(path, {&a2, &b2}, 77);
  EXPECT_EQ(a2.value, a.value);
  EXPECT_EQ(b2.value, b.value);
}

TEST(Checkpoint, RejectsHashShapeAndTampering) {
  Param a("w", 2, 2);
  a.value.setConstant(1.5);
  const auto path = temp_path("tamper.ckpt");
  save_checkpoint(path, {&a}, 9);
  EXPECT_THROW(load_checkpoint(path, {&a}, 10), CheckpointError);
  Param wrong("w", 2, 3);
  EXPECT_THROW(load_checkpoint(path, {&wrong}, 9), CheckpointError);
  Param renamed("v", 2, 2);
  EXPECT_THROW(load_checkpoint(path, {&renamed}, 9), CheckpointError);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-12, std::ios::end);
    f.put('\x7f');
  }
  EXPECT_THROW(load_checkpoint(path, {&a}, 9), CheckpointError);
  EXPECT_THROW(load_checkpoint(temp_path("missing.ckpt"), {&a}, 9), CheckpointError);
}

TEST(Checkpoint, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}
