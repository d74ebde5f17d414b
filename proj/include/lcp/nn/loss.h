#ifndef LCP_NN_LOSS_H_
#define LCP_NN_LOSS_H_

#include <span>
#include <vector>

#include "lcp/nn/matrix.h"

namespace lcp::nn {

struct SoftmaxLoss {
  // Mean over the batch of -sum_c y_c log p_c.
  double loss = 0.0;
  // d(mean loss)/d(logits) = (p - y) / batch.
  Matrix grad;
  // Softmax probabilities, classes x batch.
  Matrix probs;
};

// Column-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

// logits: classes x batch; labels: one class index per column.
SoftmaxLoss softmax_ce(const Matrix& logits, std::span<const int> labels);
// one_hot: classes x batch, each column exactly one entry equal to 1 and the
// rest 0. Throws ArgumentError otherwise.
SoftmaxLoss softmax_ce(const Matrix& logits, const Matrix& one_hot);

}  // namespace lcp::nn

#endif  // LCP_NN_LOSS_H_
