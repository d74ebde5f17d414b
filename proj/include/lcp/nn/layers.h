#ifndef LCP_NN_LAYERS_H_
#define LCP_NN_LAYERS_H_

#include <cstddef>

#include "lcp/nn/matrix.h"

namespace lcp::nn {

// ---------------------------------------------------------------------------
// Dense

struct DenseCache {
  Matrix input;  // in x batch
};

struct DenseGrads {
  Matrix input;    // in x batch
  Matrix weights;  // out x in
  Matrix bias;     // out x 1
};

// y = W x + b for a batch of column vectors x (in x batch).
Matrix dense_forward(const Matrix& x, const Matrix& weights, const Matrix& bias,
                     DenseCache* cache = nullptr);
// Exact gradients of a scalar loss given dL/dy. grad_b sums over the batch.
DenseGrads dense_backward(const Matrix& grad_y, const DenseCache& cache,
                          const Matrix& weights);

// ---------------------------------------------------------------------------
// LSTM cell. Gate blocks are stacked in the fixed order
// [input, forget, cell candidate, output], each `hidden` rows tall.

struct LstmParams {
  Matrix w;  // 4H x input
  Matrix u;  // 4H x H
  Matrix b;  // 4H x 1

  LstmParams() = default;
  LstmParams(std::size_t input, std::size_t hidden)
      : w(4 * hidden, input), u(4 * hidden, hidden), b(4 * hidden, 1) {}

  std::size_t input_size() const { return w.cols(); }
  std::size_t hidden_size() const { return u.cols(); }
};

struct LstmCache {
  Matrix x, h_prev, c_prev;
  Matrix i, f, g, o;  // activated gates, H x batch
  Matrix tanh_c;
};

struct LstmStep {
  Matrix h;
  Matrix c;
  LstmCache cache;
};

// i, f, o = sigmoid, g = tanh of the stacked pre-activations W x + U h + b;
// c = f * c_prev + i * g; h = o * tanh(c). Throws NumericError on non-finite
// input and DimensionError on shape mismatch.
LstmStep lstm_step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                   const LstmParams& params);

struct LstmStepGrads {
  Matrix x;
  Matrix h_prev;
  Matrix c_prev;
};

// Back-propagates dL/dh and dL/dc of one step. Parameter gradients are added
// into `grads` (which must already have the parameter shapes).
LstmStepGrads lstm_step_backward(const Matrix& grad_h, const Matrix& grad_c,
                                 const LstmCache& cache,
                                 const LstmParams& params, LstmParams& grads);

double sigmoid(double x);

}  // namespace lcp::nn

#endif  // LCP_NN_LAYERS_H_
