#ifndef LCP_NN_OPTIMIZER_H_
#define LCP_NN_OPTIMIZER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcp/nn/matrix.h"

namespace lcp::nn {

// A named parameter tensor with its gradient buffer.
struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;
};

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer(std::string_view text);

struct TrainConfig {
  double learning_rate = 0.00125;
  int batch_size = 64;
  int max_epochs = 50;
  // Epochs without validation improvement before stopping.
  int patience = 5;
  // Global gradient-norm clip; <= 0 disables clipping.
  double clip_norm = 5.0;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::kSgd;

  // Throws ArgumentError on non-positive learning rate or batch size.
  void validate() const;
};

double global_grad_norm(std::span<const ParamBlock> params);

// Throws NumericError naming the first block with a non-finite gradient.
void require_finite_gradients(std::span<const ParamBlock> params);

// Rescales all gradients so the global norm is at most clip (no-op when
// clip <= 0). Returns the scale applied.
double clip_gradients(std::span<ParamBlock> params, double clip);

// p <- p - lr * g after global-norm clipping.
void sgd_step(std::span<ParamBlock> params, const TrainConfig& config);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Checks gradients, clips them, and updates the parameters.
  virtual void step(std::span<ParamBlock> params) = 0;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(TrainConfig config) : config_(config) {}
  void step(std::span<ParamBlock> params) override;

 private:
  TrainConfig config_;
};

// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam : public Optimizer {
 public:
  explicit Adam(TrainConfig config) : config_(config) {}
  void step(std::span<ParamBlock> params) override;

 private:
  TrainConfig config_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  long steps_ = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config);

}  // namespace lcp::nn

#endif  // LCP_NN_OPTIMIZER_H_
