#include "lcp/nn/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lcp/errors.h"

namespace lcp::nn {

Matrix softmax(const Matrix& logits) {
  const std::size_t classes = logits.rows();
  const std::size_t batch = logits.cols();
  Matrix probs(classes, batch);
  for (std::size_t j = 0; j < batch; ++j) {
    double top = logits(0, j);
    for (std::size_t c = 1; c < classes; ++c) top = std::max(top, logits(c, j));
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      probs(c, j) = std::exp(logits(c, j) - top);
      sum += probs(c, j);
    }
    for (std::size_t c = 0; c < classes; ++c) probs(c, j) /= sum;
  }
  return probs;
}

SoftmaxLoss softmax_ce(const Matrix& logits, std::span<const int> labels) {
  const std::size_t classes = logits.rows();
  const std::size_t batch = logits.cols();
  if (labels.size() != batch) {
    throw DimensionError("softmax_ce: " + std::to_string(labels.size()) +
                         " labels for a batch of " + std::to_string(batch));
  }
  if (batch == 0) throw ArgumentError("softmax_ce: empty batch");
  SoftmaxLoss out;
  out.probs = Matrix(classes, batch);
  out.grad = Matrix(classes, batch);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t j = 0; j < batch; ++j) {
    const int label = labels[j];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ArgumentError("softmax_ce: label out of range");
    }
    double top = logits(0, j);
    for (std::size_t c = 1; c < classes; ++c) top = std::max(top, logits(c, j));
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      sum += std::exp(logits(c, j) - top);
    }
    const double log_sum = std::log(sum);
    // -log p_label = log(sum exp(z - top)) - (z_label - top)
    total += log_sum - (logits(static_cast<std::size_t>(label), j) - top);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(logits(c, j) - top - log_sum);
      out.probs(c, j) = p;
      out.grad(c, j) =
          (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_batch;
    }
  }
  out.loss = total * inv_batch;
  return out;
}

SoftmaxLoss softmax_ce(const Matrix& logits, const Matrix& one_hot) {
  require_same_shape(logits, one_hot, "softmax_ce one-hot");
  std::vector<int> labels(one_hot.cols(), -1);
  for (std::size_t j = 0; j < one_hot.cols(); ++j) {
    int ones = 0;
    for (std::size_t c = 0; c < one_hot.rows(); ++c) {
      const double v = one_hot(c, j);
      if (v == 1.0) {
        ++ones;
        labels[j] = static_cast<int>(c);
      } else if (v != 0.0) {
        throw ArgumentError("softmax_ce: label column " + std::to_string(j) +
                            " is not one-hot");
      }
    }
    if (ones != 1) {
      throw ArgumentError("softmax_ce: label column " + std::to_string(j) +
                          (ones == 0 ? " is all zero" : " has several ones"));
    }
  }
  return softmax_ce(logits, labels);
}

}  // namespace lcp::nn
