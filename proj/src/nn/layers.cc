#include "lcp/nn/layers.h"

#include <cmath>
#include <string>

#include "lcp/errors.h"

namespace lcp::nn {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix dense_forward(const Matrix& x, const Matrix& weights, const Matrix& bias,
                     DenseCache* cache) {
  if (weights.cols() != x.rows()) {
    throw DimensionError("dense: weights have " +
                         std::to_string(weights.cols()) + " inputs, x has " +
                         std::to_string(x.rows()) + " rows");
  }
  if (bias.rows() != weights.rows() || bias.cols() != 1) {
    throw DimensionError("dense: bias shape does not match weights");
  }
  Matrix y;
  matmul(weights, x, y);
  add_column(y, bias);
  if (cache != nullptr) cache->input = x;
  return y;
}

DenseGrads dense_backward(const Matrix& grad_y, const DenseCache& cache,
                          const Matrix& weights) {
  if (grad_y.rows() != weights.rows() ||
      grad_y.cols() != cache.input.cols()) {
    throw DimensionError("dense backward: grad_y shape mismatch");
  }
  DenseGrads g;
  matmul_bt(grad_y, cache.input, g.weights);
  g.bias = Matrix(weights.rows(), 1);
  accumulate_row_sums(grad_y, g.bias);
  matmul_at(weights, grad_y, g.input);
  return g;
}

LstmStep lstm_step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                   const LstmParams& params) {
  const std::size_t hidden = params.hidden_size();
  const std::size_t batch = x.cols();
  if (x.rows() != params.input_size() || h_prev.rows() != hidden ||
      c_prev.rows() != hidden || h_prev.cols() != batch ||
      c_prev.cols() != batch || params.w.rows() != 4 * hidden ||
      params.b.rows() != 4 * hidden) {
    throw DimensionError("lstm_step: shape mismatch");
  }
  if (!x.all_finite() || !h_prev.all_finite() || !c_prev.all_finite()) {
    throw NumericError("lstm_step: non-finite input");
  }

  Matrix pre;
  matmul(params.w, x, pre);
  matmul(params.u, h_prev, pre, /*accumulate=*/true);
  add_column(pre, params.b);

  LstmStep out;
  LstmCache& c = out.cache;
  c.x = x;
  c.h_prev = h_prev;
  c.c_prev = c_prev;
  c.i = Matrix(hidden, batch);
  c.f = Matrix(hidden, batch);
  c.g = Matrix(hidden, batch);
  c.o = Matrix(hidden, batch);
  c.tanh_c = Matrix(hidden, batch);
  out.h = Matrix(hidden, batch);
  out.c = Matrix(hidden, batch);
  for (std::size_t r = 0; r < hidden; ++r) {
    const double* pi = pre.data() + r * batch;
    const double* pf = pre.data() + (hidden + r) * batch;
    const double* pg = pre.data() + (2 * hidden + r) * batch;
    const double* po = pre.data() + (3 * hidden + r) * batch;
    for (std::size_t j = 0; j < batch; ++j) {
      const double i = sigmoid(pi[j]);
      const double f = sigmoid(pf[j]);
      const double g = std::tanh(pg[j]);
      const double o = sigmoid(po[j]);
      const double cell = f * c_prev(r, j) + i * g;
      const double tc = std::tanh(cell);
      c.i(r, j) = i;
      c.f(r, j) = f;
      c.g(r, j) = g;
      c.o(r, j) = o;
      c.tanh_c(r, j) = tc;
      out.c(r, j) = cell;
      out.h(r, j) = o * tc;
    }
  }
  return out;
}

LstmStepGrads lstm_step_backward(const Matrix& grad_h, const Matrix& grad_c,
                                 const LstmCache& cache,
                                 const LstmParams& params, LstmParams& grads) {
  const std::size_t hidden = params.hidden_size();
  const std::size_t batch = cache.x.cols();
  require_same_shape(grad_h, cache.i, "lstm backward grad_h");
  require_same_shape(grad_c, cache.i, "lstm backward grad_c");
  require_same_shape(grads.w, params.w, "lstm backward grads.w");
  require_same_shape(grads.u, params.u, "lstm backward grads.u");
  require_same_shape(grads.b, params.b, "lstm backward grads.b");

  LstmStepGrads out;
  out.c_prev = Matrix(hidden, batch);
  Matrix d_pre(4 * hidden, batch);
  for (std::size_t r = 0; r < hidden; ++r) {
    for (std::size_t j = 0; j < batch; ++j) {
      const double i = cache.i(r, j);
      const double f = cache.f(r, j);
      const double g = cache.g(r, j);
      const double o = cache.o(r, j);
      const double tc = cache.tanh_c(r, j);
      const double dh = grad_h(r, j);
      const double dc = grad_c(r, j) + dh * o * (1.0 - tc * tc);
      d_pre(r, j) = dc * g * i * (1.0 - i);
      d_pre(hidden + r, j) = dc * cache.c_prev(r, j) * f * (1.0 - f);
      d_pre(2 * hidden + r, j) = dc * i * (1.0 - g * g);
      d_pre(3 * hidden + r, j) = dh * tc * o * (1.0 - o);
      out.c_prev(r, j) = dc * f;
    }
  }
  matmul_bt(d_pre, cache.x, grads.w, /*accumulate=*/true);
  matmul_bt(d_pre, cache.h_prev, grads.u, /*accumulate=*/true);
  accumulate_row_sums(d_pre, grads.b);
  matmul_at(params.w, d_pre, out.x);
  matmul_at(params.u, d_pre, out.h_prev);
  return out;
}

}  // namespace lcp::nn
