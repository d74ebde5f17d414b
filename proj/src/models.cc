#include "lcp/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lcp/errors.h"
#include "lcp/nn/layers.h"
#include "lcp/nn/loss.h"
#include "lcp/rng.h"

namespace lcp {

using nn::Matrix;
using nn::ParamBlock;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSaLstm:
      return "salstm";
    case ModelKind::kFfnn:
      return "ffnn";
    case ModelKind::kLogReg:
      return "logreg";
  }
  return "?";
}

std::string_view display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSaLstm:
      return "SA-LSTM";
    case ModelKind::kFfnn:
      return "FFNN";
    case ModelKind::kLogReg:
      return "LOGREG";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  for (ModelKind k : kAllModelKinds) {
    if (text == to_string(k) || text == display_name(k)) return k;
  }
  return std::nullopt;
}

void ModelSpec::validate() const {
  if (input_dim < 1 || embed_dim < 1 || hidden_dim < 1 || n < 1) {
    throw SpecError("model: dimensions and n must be positive");
  }
  for (int width : ffnn_hidden) {
    if (width < 1) throw SpecError("model: ffnn hidden widths must be >= 1");
  }
  if (augmented && input_dim != 22) {
    throw SpecError("model: augmented features have 22 dims, got " +
                    std::to_string(input_dim));
  }
}

std::size_t ModelSpec::expected_parameter_count() const {
  const std::size_t in = static_cast<std::size_t>(input_dim);
  const std::size_t flat = in * static_cast<std::size_t>(n);
  const std::size_t classes = kNumClasses;
  switch (kind) {
    case ModelKind::kSaLstm: {
      const std::size_t e = static_cast<std::size_t>(embed_dim);
      const std::size_t h = static_cast<std::size_t>(hidden_dim);
      return in * e + e + 4 * h * (e + h) + 4 * h + h * classes + classes;
    }
    case ModelKind::kFfnn: {
      std::size_t total = 0;
      std::size_t prev = flat;
      for (int width : ffnn_hidden) {
        total += prev * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(width);
        prev = static_cast<std::size_t>(width);
      }
      return total + prev * classes + classes;
    }
    case ModelKind::kLogReg:
      return flat * classes + classes;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Batches

Batch make_batch(std::span<const Segment> segments,
                 std::span<const std::size_t> indices, int steps, int dim) {
  Batch batch;
  const std::size_t b = indices.size();
  batch.steps.assign(static_cast<std::size_t>(steps),
                     Matrix(static_cast<std::size_t>(dim), b));
  batch.labels.resize(b);
  for (std::size_t j = 0; j < b; ++j) {
    const Segment& seg = segments[indices[j]];
    if (seg.steps != steps || seg.dim != dim ||
        seg.features.size() != static_cast<std::size_t>(steps * dim)) {
      throw DimensionError("batch: segment has " + std::to_string(seg.steps) +
                           "x" + std::to_string(seg.dim) + " features, model " +
                           "expects " + std::to_string(steps) + "x" +
                           std::to_string(dim));
    }
    batch.labels[j] = class_index(seg.label);
    for (int t = 0; t < steps; ++t) {
      const auto values = seg.step(t);
      Matrix& m = batch.steps[static_cast<std::size_t>(t)];
      for (int k = 0; k < dim; ++k) {
        m(static_cast<std::size_t>(k), j) = values[static_cast<std::size_t>(k)];
      }
    }
  }
  return batch;
}

Batch make_batch(std::span<const Segment> segments, int steps, int dim) {
  std::vector<std::size_t> all(segments.size());
  std::iota(all.begin(), all.end(), 0);
  return make_batch(segments, all, steps, dim);
}

// ---------------------------------------------------------------------------
// Model base

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for (const ParamBlock& p : params_) total += p.value.size();
  return total;
}

double Model::loss(const Batch& batch) const {
  return nn::softmax_ce(logits(batch.steps), batch.labels).loss;
}

void Model::zero_grads() {
  for (ParamBlock& p : params_) p.grad.fill(0.0);
}

ParamBlock& Model::add_block(std::string name, std::size_t rows,
                             std::size_t cols) {
  params_.push_back(
      ParamBlock{std::move(name), Matrix(rows, cols), Matrix(rows, cols)});
  return params_.back();
}

namespace {

std::size_t count_correct(const Matrix& logits, std::span<const int> labels) {
  std::size_t hits = 0;
  std::vector<double> column(logits.rows());
  for (std::size_t j = 0; j < logits.cols(); ++j) {
    for (std::size_t c = 0; c < logits.rows(); ++c) column[c] = logits(c, j);
    if (class_index(argmax_class(column)) == labels[j]) ++hits;
  }
  return hits;
}

void check_steps(std::span<const Matrix> steps, const ModelSpec& spec) {
  if (steps.size() != static_cast<std::size_t>(spec.n)) {
    throw DimensionError("model expects " + std::to_string(spec.n) +
                         " steps, got " + std::to_string(steps.size()));
  }
  for (const Matrix& m : steps) {
    if (m.rows() != static_cast<std::size_t>(spec.input_dim) ||
        m.cols() != steps.front().cols()) {
      throw DimensionError("model expects " + std::to_string(spec.input_dim) +
                           "-dim steps");
    }
  }
}

// Stacks the steps of a batch into one (n * dim) x batch matrix, step-major
// like Segment::features.
Matrix flatten(std::span<const Matrix> steps) {
  const std::size_t dim = steps.front().rows();
  const std::size_t b = steps.front().cols();
  Matrix out(dim * steps.size(), b);
  for (std::size_t t = 0; t < steps.size(); ++t) {
    std::copy(steps[t].data(), steps[t].data() + dim * b,
              out.data() + t * dim * b);
  }
  return out;
}

class SaLstm final : public Model {
 public:
  explicit SaLstm(ModelSpec spec) : Model(std::move(spec)) {
    const std::size_t in = static_cast<std::size_t>(spec_.input_dim);
    const std::size_t e = static_cast<std::size_t>(spec_.embed_dim);
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    add_block("embed.w", e, in);
    add_block("embed.b", e, 1);
    add_block("lstm.w", 4 * h, e);
    add_block("lstm.u", 4 * h, h);
    add_block("lstm.b", 4 * h, 1);
    add_block("head.w", kNumClasses, h);
    add_block("head.b", kNumClasses, 1);
  }

  Matrix logits(std::span<const Matrix> steps) const override {
    check_steps(steps, spec_);
    const nn::LstmParams lstm = lstm_params();
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    const std::size_t b = steps.front().cols();
    Matrix hs(h, b), cs(h, b);
    for (const Matrix& x : steps) {
      const Matrix e = nn::dense_forward(x, params_[0].value, params_[1].value);
      nn::LstmStep s = nn::lstm_step(e, hs, cs, lstm);
      hs = std::move(s.h);
      cs = std::move(s.c);
    }
    return nn::dense_forward(hs, params_[5].value, params_[6].value);
  }

  double loss_and_grad(const Batch& batch, std::size_t* correct) override {
    check_steps(batch.steps, spec_);
    const nn::LstmParams lstm = lstm_params();
    const std::size_t h = static_cast<std::size_t>(spec_.hidden_dim);
    const std::size_t b = batch.size();
    const std::size_t n = batch.steps.size();

    std::vector<nn::DenseCache> embed_caches(n);
    std::vector<nn::LstmCache> caches(n);
    Matrix hs(h, b), cs(h, b);
    for (std::size_t t = 0; t < n; ++t) {
      const Matrix e = nn::dense_forward(batch.steps[t], params_[0].value,
                                         params_[1].value, &embed_caches[t]);
      nn::LstmStep s = nn::lstm_step(e, hs, cs, lstm);
      hs = std::move(s.h);
      cs = std::move(s.c);
      caches[t] = std::move(s.cache);
    }
    nn::DenseCache head_cache;
    const Matrix out =
        nn::dense_forward(hs, params_[5].value, params_[6].value, &head_cache);
    const nn::SoftmaxLoss loss = nn::softmax_ce(out, batch.labels);
    if (correct != nullptr) *correct = count_correct(out, batch.labels);

    zero_grads();
    const nn::DenseGrads head =
        nn::dense_backward(loss.grad, head_cache, params_[5].value);
    params_[5].grad = head.weights;
    params_[6].grad = head.bias;

    nn::LstmParams grads(lstm.input_size(), h);
    Matrix dh = head.input;
    Matrix dc(h, b);
    for (std::size_t t = n; t-- > 0;) {
      nn::LstmStepGrads g =
          nn::lstm_step_backward(dh, dc, caches[t], lstm, grads);
      const nn::DenseGrads eg =
          nn::dense_backward(g.x, embed_caches[t], params_[0].value);
      for (std::size_t k = 0; k < eg.weights.size(); ++k) {
        params_[0].grad.data()[k] += eg.weights.data()[k];
      }
      for (std::size_t k = 0; k < eg.bias.size(); ++k) {
        params_[1].grad.data()[k] += eg.bias.data()[k];
      }
      dh = std::move(g.h_prev);
      dc = std::move(g.c_prev);
    }
    params_[2].grad = std::move(grads.w);
    params_[3].grad = std::move(grads.u);
    params_[4].grad = std::move(grads.b);
    return loss.loss;
  }

 private:
  nn::LstmParams lstm_params() const {
    nn::LstmParams p;
    p.w = params_[2].value;
    p.u = params_[3].value;
    p.b = params_[4].value;
    return p;
  }
};

// Dense stack on the flattened segment: tanh hidden layers, linear output.
// With no hidden layers this is multinomial logistic regression.
class DenseStack final : public Model {
 public:
  DenseStack(ModelSpec spec, std::vector<int> hidden)
      : Model(std::move(spec)), layers_(hidden.size() + 1) {
    std::size_t prev =
        static_cast<std::size_t>(spec_.input_dim) * static_cast<std::size_t>(spec_.n);
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      const std::size_t width = static_cast<std::size_t>(hidden[l]);
      add_block("dense" + std::to_string(l + 1) + ".w", width, prev);
      add_block("dense" + std::to_string(l + 1) + ".b", width, 1);
      prev = width;
    }
    add_block("head.w", kNumClasses, prev);
    add_block("head.b", kNumClasses, 1);
  }

  Matrix logits(std::span<const Matrix> steps) const override {
    check_steps(steps, spec_);
    Matrix a = flatten(steps);
    for (std::size_t l = 0; l < layers_; ++l) {
      a = nn::dense_forward(a, params_[2 * l].value, params_[2 * l + 1].value);
      if (l + 1 < layers_) {
        for (double& v : a.values()) v = std::tanh(v);
      }
    }
    return a;
  }

  double loss_and_grad(const Batch& batch, std::size_t* correct) override {
    check_steps(batch.steps, spec_);
    std::vector<nn::DenseCache> caches(layers_);
    std::vector<Matrix> activations(layers_);
    Matrix a = flatten(batch.steps);
    for (std::size_t l = 0; l < layers_; ++l) {
      a = nn::dense_forward(a, params_[2 * l].value, params_[2 * l + 1].value,
                            &caches[l]);
      if (l + 1 < layers_) {
        for (double& v : a.values()) v = std::tanh(v);
        activations[l] = a;
      }
    }
    const nn::SoftmaxLoss loss = nn::softmax_ce(a, batch.labels);
    if (correct != nullptr) *correct = count_correct(a, batch.labels);

    Matrix grad = loss.grad;
    for (std::size_t l = layers_; l-- > 0;) {
      if (l + 1 < layers_) {
        const Matrix& act = activations[l];
        for (std::size_t k = 0; k < grad.size(); ++k) {
          const double y = act.data()[k];
          grad.data()[k] *= 1.0 - y * y;
        }
      }
      nn::DenseGrads g = nn::dense_backward(grad, caches[l], params_[2 * l].value);
      params_[2 * l].grad = std::move(g.weights);
      params_[2 * l + 1].grad = std::move(g.bias);
      grad = std::move(g.input);
    }
    return loss.loss;
  }

 private:
  std::size_t layers_;
};

}  // namespace

std::unique_ptr<Model> build(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::unique_ptr<Model> model;
  switch (spec.kind) {
    case ModelKind::kSaLstm:
      model = std::make_unique<SaLstm>(spec);
      break;
    case ModelKind::kFfnn:
      model = std::make_unique<DenseStack>(spec, spec.ffnn_hidden);
      break;
    case ModelKind::kLogReg:
      model = std::make_unique<DenseStack>(spec, std::vector<int>{});
      break;
  }
  Rng rng(seed);
  for (ParamBlock& p : model->params()) {
    const bool bias = p.value.cols() == 1 && p.name.ends_with(".b");
    if (bias) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.value.cols()));
    for (double& v : p.value.values()) v = rng.uniform(-bound, bound);
  }
  if (spec.kind == ModelKind::kSaLstm) {
    ParamBlock& b = model->params()[4];
    const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
    for (std::size_t r = h; r < 2 * h; ++r) b.value(r, 0) = 1.0;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Inference

Maneuver argmax_class(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return maneuver_from_index(static_cast<int>(best));
}

DecisionVector predict(const Model& model, const Segment& segment) {
  const Segment* one = &segment;
  const Batch batch = make_batch(std::span<const Segment>(one, 1),
                                 model.spec().n, model.spec().input_dim);
  const Matrix p = nn::softmax(model.logits(batch.steps));
  return {p(0, 0), p(1, 0), p(2, 0)};
}

Maneuver classify(const Model& model, const Segment& segment) {
  const DecisionVector p = predict(model, segment);
  return argmax_class(p);
}

std::vector<Maneuver> classify_all(const Model& model,
                                   std::span<const Segment> segments,
                                   std::size_t batch_size) {
  std::vector<Maneuver> out;
  out.reserve(segments.size());
  std::vector<std::size_t> idx;
  std::vector<double> column(kNumClasses);
  for (std::size_t begin = 0; begin < segments.size(); begin += batch_size) {
    const std::size_t end = std::min(segments.size(), begin + batch_size);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Batch batch =
        make_batch(segments, idx, model.spec().n, model.spec().input_dim);
    const Matrix p = nn::softmax(model.logits(batch.steps));
    for (std::size_t j = 0; j < p.cols(); ++j) {
      for (std::size_t c = 0; c < kNumClasses; ++c) column[c] = p(c, j);
      out.push_back(argmax_class(column));
    }
  }
  return out;
}

double accuracy(const Model& model, std::span<const Segment> segments) {
  if (segments.empty()) return 0.0;
  const std::vector<Maneuver> predicted = classify_all(model, segments);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (predicted[i] == segments[i].label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(segments.size());
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

Evaluation evaluate(const Model& model, std::span<const Segment> segments,
                    std::span<const std::size_t> indices) {
  Evaluation ev;
  if (indices.empty()) return ev;
  constexpr std::size_t kChunk = 512;
  double loss_sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t begin = 0; begin < indices.size(); begin += kChunk) {
    const auto chunk =
        indices.subspan(begin, std::min(kChunk, indices.size() - begin));
    const Batch batch =
        make_batch(segments, chunk, model.spec().n, model.spec().input_dim);
    const Matrix out = model.logits(batch.steps);
    loss_sum += nn::softmax_ce(out, batch.labels).loss *
                static_cast<double>(chunk.size());
    hits += count_correct(out, batch.labels);
  }
  const double count = static_cast<double>(indices.size());
  ev.loss = loss_sum / count;
  ev.accuracy = static_cast<double>(hits) / count;
  return ev;
}

std::vector<Matrix> snapshot(const Model& model) {
  std::vector<Matrix> values;
  for (const ParamBlock& p : model.params()) values.push_back(p.value);
  return values;
}

void restore(Model& model, const std::vector<Matrix>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    model.params()[i].value = values[i];
  }
}

}  // namespace

TrainHistory train(Model& model, std::span<const Segment> segments,
                   const nn::TrainConfig& config) {
  config.validate();
  TrainHistory history;
  if (config.max_epochs == 0) return history;
  if (segments.empty()) throw ArgumentError("train: no segments");

  Rng rng(config.seed);
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t val_count = static_cast<std::size_t>(
      std::floor(config.val_fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> val(order.begin(), order.begin() + val_count);
  std::vector<std::size_t> fit(order.begin() + val_count, order.end());
  if (fit.empty()) throw ArgumentError("train: validation split leaves no data");
  history.train_size = fit.size();
  history.val_size = val.size();
  // Without a validation split, selection falls back to the training loss.
  const std::span<const std::size_t> select =
      val.empty() ? std::span<const std::size_t>(fit) : val;

  std::unique_ptr<nn::Optimizer> optimizer = nn::make_optimizer(config);
  std::vector<Matrix> best = snapshot(model);
  double best_loss = evaluate(model, segments, select).loss;
  int since_best = 0;
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  const auto abort = [&](const std::string& why) {
    restore(model, best);
    throw NumericError("train: " + why + "; restored parameters of epoch " +
                       std::to_string(history.best_epoch));
  };

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(fit);
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t begin = 0; begin < fit.size(); begin += batch_size) {
      const std::span<const std::size_t> chunk(
          fit.data() + begin, std::min(batch_size, fit.size() - begin));
      const Batch batch =
          make_batch(segments, chunk, model.spec().n, model.spec().input_dim);
      std::size_t correct = 0;
      double loss = 0.0;
      try {
        loss = model.loss_and_grad(batch, &correct);
      } catch (const NumericError& e) {
        abort(e.what());
      }
      if (!std::isfinite(loss)) {
        abort("non-finite loss in epoch " + std::to_string(epoch));
      }
      try {
        optimizer->step(model.params());
      } catch (const NumericError& e) {
        abort(e.what());
      }
      loss_sum += loss * static_cast<double>(chunk.size());
      hits += correct;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(fit.size());
    stats.train_accuracy =
        static_cast<double>(hits) / static_cast<double>(fit.size());
    const Evaluation ev = evaluate(model, segments, val);
    stats.val_loss = ev.loss;
    stats.val_accuracy = ev.accuracy;
    history.epochs.push_back(stats);

    const double score =
        val.empty() ? evaluate(model, segments, fit).loss : ev.loss;
    if (!std::isfinite(score)) abort("non-finite validation loss");
    if (score < best_loss) {
      best_loss = score;
      best = snapshot(model);
      history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      history.early_stopped = true;
      break;
    }
  }
  restore(model, best);
  return history;
}

nn::GradCheckReport check_model_gradients(Model& model, const Batch& batch,
                                          double eps, double tol) {
  model.loss_and_grad(batch);
  const auto loss = [&]() { return model.loss(batch); };
  return nn::grad_check(model.params(), loss, eps, tol);
}

}  // namespace lcp
