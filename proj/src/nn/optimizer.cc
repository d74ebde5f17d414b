#include "lcp/nn/optimizer.h"

#include <cmath>

#include "lcp/errors.h"

namespace lcp::nn {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::kSgd;
  if (text == "adam") return OptimizerKind::kAdam;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw ArgumentError("train: learning_rate must be > 0");
  }
  if (batch_size < 1) throw ArgumentError("train: batch_size must be >= 1");
  if (max_epochs < 0) throw ArgumentError("train: max_epochs must be >= 0");
  if (patience < 1) throw ArgumentError("train: patience must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ArgumentError("train: val_fraction must be in [0, 1)");
  }
}

double global_grad_norm(std::span<const ParamBlock> params) {
  double sum = 0.0;
  for (const ParamBlock& p : params) sum += p.grad.squared_norm();
  return std::sqrt(sum);
}

void require_finite_gradients(std::span<const ParamBlock> params) {
  for (const ParamBlock& p : params) {
    if (!p.grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter block '" + p.name +
                         "'");
    }
  }
}

double clip_gradients(std::span<ParamBlock> params, double clip) {
  if (clip <= 0.0) return 1.0;
  const double norm = global_grad_norm(params);
  if (norm <= clip) return 1.0;
  const double scale = clip / norm;
  for (ParamBlock& p : params) {
    for (double& g : p.grad.values()) g *= scale;
  }
  return scale;
}

void sgd_step(std::span<ParamBlock> params, const TrainConfig& config) {
  require_finite_gradients(params);
  clip_gradients(params, config.clip_norm);
  for (ParamBlock& p : params) {
    require_same_shape(p.value, p.grad, p.name.c_str());
    double* value = p.value.data();
    const double* grad = p.grad.data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      value[k] -= config.learning_rate * grad[k];
    }
  }
}

void Sgd::step(std::span<ParamBlock> params) { sgd_step(params, config_); }

void Adam::step(std::span<ParamBlock> params) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  require_finite_gradients(params);
  clip_gradients(params, config_.clip_norm);
  if (first_.empty()) {
    for (const ParamBlock& p : params) {
      first_.emplace_back(p.value.rows(), p.value.cols());
      second_.emplace_back(p.value.rows(), p.value.cols());
    }
  }
  if (first_.size() != params.size()) {
    throw DimensionError("adam: parameter set changed between steps");
  }
  ++steps_;
  const double correct1 = 1.0 - std::pow(kBeta1, static_cast<double>(steps_));
  const double correct2 = 1.0 - std::pow(kBeta2, static_cast<double>(steps_));
  const double step_size = config_.learning_rate / correct1;
  for (std::size_t b = 0; b < params.size(); ++b) {
    ParamBlock& p = params[b];
    require_same_shape(p.value, first_[b], p.name.c_str());
    double* value = p.value.data();
    const double* grad = p.grad.data();
    double* m = first_[b].data();
    double* v = second_[b].data();
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grad[k];
      v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
      value[k] -= step_size * m[k] / (std::sqrt(v[k] / correct2) + kEps);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config) {
  config.validate();
  if (config.optimizer == OptimizerKind::kSgd) {
    return std::make_unique<Sgd>(config);
  }
  return std::make_unique<Adam>(config);
}

}  // namespace lcp::nn
