#ifndef LCP_MODELS_H_
#define LCP_MODELS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcp/nn/grad_check.h"
#include "lcp/nn/matrix.h"
#include "lcp/nn/optimizer.h"
#include "lcp/segment.h"
#include "lcp/types.h"

namespace lcp {

enum class ModelKind { kSaLstm, kFfnn, kLogReg };

inline constexpr std::array<ModelKind, 3> kAllModelKinds = {
    ModelKind::kSaLstm, ModelKind::kFfnn, ModelKind::kLogReg};

// "salstm", "ffnn", "logreg".
std::string_view to_string(ModelKind kind);
// "SA-LSTM", "FFNN", "LOGREG".
std::string_view display_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

struct ModelSpec {
  ModelKind kind = ModelKind::kSaLstm;
  int input_dim = 12;
  int embed_dim = 64;
  int hidden_dim = 128;
  // Segment length in steps.
  int n = 9;
  bool augmented = false;
  // Hidden widths of the feedforward baseline.
  std::vector<int> ffnn_hidden = {128, 64};

  // Throws SpecError on non-positive sizes or an input_dim that disagrees
  // with the augmented flag (12 / 22).
  void validate() const;
  // Number of trainable scalars, from the closed-form layer sizes.
  std::size_t expected_parameter_count() const;

  bool operator==(const ModelSpec&) const = default;
};

// A batch of segments: one (dim x batch) matrix per step, plus labels.
struct Batch {
  std::vector<nn::Matrix> steps;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Throws DimensionError when segments disagree with (steps, dim).
Batch make_batch(std::span<const Segment> segments,
                 std::span<const std::size_t> indices, int steps, int dim);
Batch make_batch(std::span<const Segment> segments, int steps, int dim);

class Model {
 public:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)) {}
  virtual ~Model() = default;

  const ModelSpec& spec() const { return spec_; }
  std::vector<nn::ParamBlock>& params() { return params_; }
  const std::vector<nn::ParamBlock>& params() const { return params_; }
  std::size_t parameter_count() const;

  // Class scores, 3 x batch.
  virtual nn::Matrix logits(std::span<const nn::Matrix> steps) const = 0;
  // Mean cross-entropy of the batch; overwrites every block's grad. When
  // correct is given it receives the number of argmax hits.
  virtual double loss_and_grad(const Batch& batch,
                               std::size_t* correct = nullptr) = 0;
  double loss(const Batch& batch) const;

  void zero_grads();

 protected:
  nn::ParamBlock& add_block(std::string name, std::size_t rows,
                            std::size_t cols);

  ModelSpec spec_;
  std::vector<nn::ParamBlock> params_;
};

// Weights uniform in +-1/sqrt(fan_in), biases 0 except the LSTM forget gate
// at 1. Same spec and seed give identical weights.
std::unique_ptr<Model> build(const ModelSpec& spec, std::uint64_t seed);

// Decision vector [p_left, p_follow, p_right].
using DecisionVector = std::array<double, kNumClasses>;

// Throws DimensionError if the segment shape disagrees with the model.
DecisionVector predict(const Model& model, const Segment& segment);
Maneuver classify(const Model& model, const Segment& segment);
// Argmax with ties going to the lower class index (Left < Follow < Right).
Maneuver argmax_class(std::span<const double> scores);
// Batched classification of many segments.
std::vector<Maneuver> classify_all(const Model& model,
                                   std::span<const Segment> segments,
                                   std::size_t batch_size = 256);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  // Epoch whose parameters were kept (0 = initialization).
  int best_epoch = 0;
  bool early_stopped = false;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
};

// Mini-batch training on mean softmax cross-entropy. A seeded val_fraction
// of the segments is held out for early stopping; the parameters of the best
// validation epoch are restored at the end. A non-finite loss or gradient
// restores the last good parameters and throws NumericError.
TrainHistory train(Model& model, std::span<const Segment> segments,
                   const nn::TrainConfig& config);

// Fraction of segments classified correctly.
double accuracy(const Model& model, std::span<const Segment> segments);

// Central-difference check of every parameter on one batch.
nn::GradCheckReport check_model_gradients(Model& model, const Batch& batch,
                                          double eps, double tol);

}  // namespace lcp

#endif  // LCP_MODELS_H_
