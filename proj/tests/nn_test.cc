#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lcp/errors.h"
#include "lcp/nn/grad_check.h"
#include "lcp/nn/layers.h"
#include "lcp/nn/loss.h"
#include "lcp/nn/matrix.h"
#include "lcp/nn/optimizer.h"
#include "lcp/rng.h"

namespace lcp::nn {
namespace {

Matrix Random(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
  return m;
}

Matrix Naive(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

Matrix Transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

void ExpectNear(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(a.values()[k], b.values()[k], tol) << "entry " << k;
  }
}

TEST(Matrix, KernelsMatchNaiveProducts) {
  Rng rng(1);
  const Matrix a = Random(7, 5, rng), b = Random(5, 9, rng);
  Matrix out;
  matmul(a, b, out);
  ExpectNear(out, Naive(a, b), 1e-12);
  matmul_bt(a, Transpose(b), out);
  ExpectNear(out, Naive(a, b), 1e-12);
  matmul_at(Transpose(a), b, out);
  ExpectNear(out, Naive(a, b), 1e-12);
  Matrix acc = Naive(a, b);
  matmul(a, b, acc, true);
  Matrix twice = Naive(a, b);
  for (double& v : twice.values()) v *= 2;
  ExpectNear(acc, twice, 1e-12);
}

TEST(Matrix, ShapeErrors) {
  Matrix out;
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3), out), DimensionError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  Matrix wrong(1, 1);
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(3, 2), wrong, true), DimensionError);
}

TEST(Dense, IdentityAndShapes) {
  const Matrix x(3, 2, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(dense_forward(x, Matrix::identity(3), Matrix(3, 1)), x);
  EXPECT_THROW(dense_forward(x, Matrix(2, 4), Matrix(2, 1)), DimensionError);
  EXPECT_THROW(dense_forward(x, Matrix(2, 3), Matrix(3, 1)), DimensionError);
}

TEST(Dense, BiasOnlyGradientSumsBatch) {
  const Matrix x(3, 4, 1.0);
  DenseCache cache;
  dense_forward(x, Matrix(2, 3), Matrix(2, 1), &cache);
  const Matrix gy(2, 4, {1, 2, 3, 4, -1, -1, -1, -1});
  const DenseGrads g = dense_backward(gy, cache, Matrix(2, 3));
  EXPECT_EQ(g.bias, Matrix(2, 1, {10, -4}));
  EXPECT_EQ(g.input, Matrix(3, 4));
}

TEST(Dense, GradientMatchesCentralDifferences) {
  Rng rng(2);
  std::vector<ParamBlock> params = {{"w", Random(5, 3, rng), Matrix(5, 3)},
                                    {"b", Random(5, 1, rng), Matrix(5, 1)}};
  const Matrix x = Random(3, 4, rng);
  const Matrix r = Random(5, 4, rng);
  // Nonlinear scalar loss: sum(r * y^2) / 2.
  const auto loss = [&]() {
    const Matrix y = dense_forward(x, params[0].value, params[1].value);
    double l = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      l += 0.5 * r.values()[k] * y.values()[k] * y.values()[k];
    }
    return l;
  };
  DenseCache cache;
  const Matrix y = dense_forward(x, params[0].value, params[1].value, &cache);
  Matrix gy(5, 4);
  for (std::size_t k = 0; k < y.size(); ++k) {
    gy.values()[k] = r.values()[k] * y.values()[k];
  }
  const DenseGrads g = dense_backward(gy, cache, params[0].value);
  params[0].grad = g.weights;
  params[1].grad = g.bias;
  const GradCheckReport report = grad_check(params, loss, 1e-5, 1e-6);
  EXPECT_TRUE(report.passed) << report.max_rel_error;
  EXPECT_EQ(report.checked, 20u);
}

TEST(Lstm, ZeroWeightsGiveZeroState) {
  Rng rng(3);
  const LstmParams p(4, 6);
  const LstmStep s = lstm_step(Random(4, 2, rng), Matrix(6, 2), Matrix(6, 2), p);
  EXPECT_EQ(s.h, Matrix(6, 2));
  EXPECT_EQ(s.c, Matrix(6, 2));
}

TEST(Lstm, SaturatedGatesCarryCellState) {
  Rng rng(4);
  const std::size_t h = 5;
  LstmParams p(3, h);
  for (std::size_t r = 0; r < h; ++r) {
    p.b(r, 0) = -10.0;      // input gate closed
    p.b(h + r, 0) = 10.0;   // forget gate open
  }
  const Matrix c_prev = Random(h, 2, rng);
  const LstmStep s = lstm_step(Random(3, 2, rng), Random(h, 2, rng), c_prev, p);
  ExpectNear(s.c, c_prev, 1e-4);
}

TEST(Lstm, Errors) {
  const LstmParams p(3, 4);
  EXPECT_THROW(lstm_step(Matrix(2, 1), Matrix(4, 1), Matrix(4, 1), p),
               DimensionError);
  Matrix x(3, 1);
  x(0, 0) = NAN;
  EXPECT_THROW(lstm_step(x, Matrix(4, 1), Matrix(4, 1), p), NumericError);
}

TEST(Lstm, BpttMatchesCentralDifferences) {
  Rng rng(5);
  const std::size_t in = 3, hidden = 4, batch = 2, steps = 6;
  std::vector<ParamBlock> params = {
      {"w", Random(4 * hidden, in, rng, 0.8), Matrix(4 * hidden, in)},
      {"u", Random(4 * hidden, hidden, rng, 0.8), Matrix(4 * hidden, hidden)},
      {"b", Random(4 * hidden, 1, rng, 0.5), Matrix(4 * hidden, 1)}};
  std::vector<Matrix> xs, rs;
  for (std::size_t t = 0; t < steps; ++t) {
    xs.push_back(Random(in, batch, rng));
    rs.push_back(Random(hidden, batch, rng));
  }
  const auto as_params = [&]() {
    LstmParams p;
    p.w = params[0].value;
    p.u = params[1].value;
    p.b = params[2].value;
    return p;
  };
  // Loss sums a weighted readout of every hidden state plus the final cell.
  const auto loss = [&]() {
    const LstmParams p = as_params();
    Matrix h(hidden, batch), c(hidden, batch);
    double l = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      LstmStep s = lstm_step(xs[t], h, c, p);
      h = s.h;
      c = s.c;
      for (std::size_t k = 0; k < h.size(); ++k) {
        l += rs[t].values()[k] * h.values()[k];
      }
    }
    for (double v : c.values()) l += 0.5 * v * v;
    return l;
  };

  const LstmParams p = as_params();
  std::vector<LstmCache> caches;
  Matrix h(hidden, batch), c(hidden, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    LstmStep s = lstm_step(xs[t], h, c, p);
    h = s.h;
    c = s.c;
    caches.push_back(std::move(s.cache));
  }
  LstmParams grads(in, hidden);
  Matrix dh(hidden, batch), dc = c;
  std::vector<Matrix> dxs(steps);
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t k = 0; k < dh.size(); ++k) {
      dh.values()[k] += rs[t].values()[k];
    }
    LstmStepGrads g = lstm_step_backward(dh, dc, caches[t], p, grads);
    dh = g.h_prev;
    dc = g.c_prev;
    dxs[t] = g.x;
  }
  params[0].grad = grads.w;
  params[1].grad = grads.u;
  params[2].grad = grads.b;
  const GradCheckReport report = grad_check(params, loss, 1e-5, 1e-5);
  EXPECT_TRUE(report.passed) << report.max_rel_error << " in "
                             << report.worst_block;

  // Input gradients too, treating x_0 as a parameter.
  std::vector<ParamBlock> input = {{"x0", xs[0], dxs[0]}};
  const auto loss_x = [&]() {
    xs[0] = input[0].value;
    return loss();
  };
  EXPECT_TRUE(grad_check(input, loss_x, 1e-5, 1e-5).passed);
}

TEST(Softmax, UniformLogits) {
  for (int label = 0; label < 3; ++label) {
    const int labels[] = {label};
    const SoftmaxLoss l = softmax_ce(Matrix(3, 1), labels);
    EXPECT_NEAR(l.loss, std::log(3.0), 1e-15);
  }
}

TEST(Softmax, LargeLogitsAreStable) {
  const int labels[] = {0};
  const SoftmaxLoss l = softmax_ce(Matrix(3, 1, {1000, 0, 0}), labels);
  EXPECT_TRUE(std::isfinite(l.loss));
  EXPECT_LT(l.loss, 1e-300);
  EXPECT_TRUE(l.grad.all_finite());
  const int wrong[] = {1};
  EXPECT_NEAR(softmax_ce(Matrix(3, 1, {1000, 0, 0}), wrong).loss, 1000.0,
              1e-9);
}

TEST(Softmax, ProbabilitiesSumToOne) {
  Rng rng(6);
  const Matrix p = softmax(Random(3, 50, rng, 30.0));
  for (std::size_t j = 0; j < p.cols(); ++j) {
    double sum = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_GT(p(c, j), 0.0);
      sum += p(c, j);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Softmax, BatchLossIsMeanOfSampleLosses) {
  Rng rng(7);
  const Matrix logits = Random(3, 16, rng, 4.0);
  std::vector<int> labels(16);
  double sum = 0;
  for (int j = 0; j < 16; ++j) {
    labels[j] = static_cast<int>(rng.index(3));
    Matrix col(3, 1);
    for (int c = 0; c < 3; ++c) col(c, 0) = logits(c, j);
    const int one[] = {labels[j]};
    sum += softmax_ce(col, one).loss;
  }
  EXPECT_NEAR(softmax_ce(logits, labels).loss, sum / 16, 1e-12);
}

TEST(Softmax, GradientMatchesCentralDifferences) {
  Rng rng(8);
  std::vector<int> labels = {0, 2, 1, 2};
  std::vector<ParamBlock> block = {{"logits", Random(3, 4, rng, 3.0), {}}};
  block[0].grad = softmax_ce(block[0].value, labels).grad;
  const auto loss = [&]() { return softmax_ce(block[0].value, labels).loss; };
  const GradCheckReport r = grad_check(block, loss, 1e-5, 1e-8);
  EXPECT_TRUE(r.passed) << r.max_rel_error;
}

TEST(Softmax, OneHotLabels) {
  const Matrix logits(3, 2, {1, 2, 0, 0, -1, 3});
  const Matrix one_hot(3, 2, {0, 0, 1, 0, 0, 1});
  const int labels[] = {1, 2};
  EXPECT_EQ(softmax_ce(logits, one_hot).loss, softmax_ce(logits, labels).loss);
  EXPECT_THROW(softmax_ce(logits, Matrix(3, 2)), ArgumentError);
  EXPECT_THROW(softmax_ce(logits, Matrix(3, 2, {1, 0, 1, 0, 0, 1})),
               ArgumentError);
}

TEST(Sgd, Examples) {
  TrainConfig cfg;
  cfg.clip_norm = 0;
  std::vector<ParamBlock> p = {{"p", Matrix(1, 1, {1.0}), Matrix(1, 1, {0.0})}};
  sgd_step(p, cfg);
  EXPECT_EQ(p[0].value(0, 0), 1.0);
  p[0].grad(0, 0) = 2.0;
  sgd_step(p, cfg);
  EXPECT_DOUBLE_EQ(p[0].value(0, 0), 0.9975);
}

TEST(Sgd, ClippingScalesStep) {
  TrainConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.clip_norm = 5.0;
  std::vector<ParamBlock> p = {
      {"a", Matrix(1, 2), Matrix(1, 2, {30, 0})},
      {"b", Matrix(1, 1), Matrix(1, 1, {40})}};
  EXPECT_DOUBLE_EQ(global_grad_norm(p), 50.0);
  sgd_step(p, cfg);
  EXPECT_DOUBLE_EQ(p[0].value(0, 0), -3.0);
  EXPECT_DOUBLE_EQ(p[1].value(0, 0), -4.0);
}

TEST(Sgd, NonFiniteGradientNamesBlock) {
  std::vector<ParamBlock> p = {{"head.w", Matrix(1, 1), Matrix(1, 1, {NAN})}};
  try {
    sgd_step(p, TrainConfig{});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("head.w"), std::string::npos);
  }
}

TEST(Adam, MinimizesQuadratic) {
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  Adam adam(cfg);
  std::vector<ParamBlock> p = {{"x", Matrix(2, 1, {3.0, -2.0}), Matrix(2, 1)}};
  for (int it = 0; it < 2000; ++it) {
    p[0].grad = p[0].value;  // gradient of |x|^2 / 2
    adam.step(p);
  }
  EXPECT_LT(std::abs(p[0].value(0, 0)), 1e-3);
  EXPECT_LT(std::abs(p[0].value(1, 0)), 1e-3);
}

TEST(GradCheck, LinearModelIsExact) {
  Rng rng(9);
  const Matrix x = Random(4, 3, rng), r = Random(2, 3, rng);
  std::vector<ParamBlock> p = {{"w", Random(2, 4, rng), {}}};
  matmul_bt(r, x, p[0].grad);  // d/dW sum(r * Wx) = r x^T
  const auto loss = [&]() {
    Matrix y;
    matmul(p[0].value, x, y);
    double l = 0;
    for (std::size_t k = 0; k < y.size(); ++k) l += r.values()[k] * y.values()[k];
    return l;
  };
  const GradCheckReport report = grad_check(p, loss, 1e-5, 1e-9);
  EXPECT_TRUE(report.passed) << report.max_rel_error;
}

TEST(GradCheck, DetectsCorruptedGradient) {
  Rng rng(10);
  const Matrix x = Random(4, 3, rng), r = Random(2, 3, rng);
  std::vector<ParamBlock> p = {{"w", Random(2, 4, rng), {}}};
  matmul_bt(r, x, p[0].grad);
  for (double& g : p[0].grad.values()) g *= 1.01;
  const auto loss = [&]() {
    Matrix y;
    matmul(p[0].value, x, y);
    double l = 0;
    for (std::size_t k = 0; k < y.size(); ++k) l += r.values()[k] * y.values()[k];
    return l;
  };
  const Matrix before = p[0].value;
  const GradCheckReport report = grad_check(p, loss, 1e-5, 1e-4);
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(p[0].value, before);
}

}  // namespace
}  // namespace lcp::nn
