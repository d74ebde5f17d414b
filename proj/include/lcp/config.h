#ifndef LCP_CONFIG_H_
#define LCP_CONFIG_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lcp/features.h"
#include "lcp/ingest.h"
#include "lcp/labeling.h"
#include "lcp/models.h"
#include "lcp/nn/optimizer.h"
#include "lcp/synthetic.h"

namespace lcp {

// Every tunable of a run. Serialized as "key = value" lines; the same keys
// are accepted as --kebab-case command-line overrides.
struct RunConfig {
  // Synthetic data.
  std::uint64_t synth_seed = 1;
  int synth_sequences = 1;
  double synth_duration_s = 600.0;
  int synth_lanes = 4;
  double synth_lane_width = 3.7;
  double synth_entry_gap_s = 2.0;
  double synth_change_probability = 0.6;
  double synth_change_duration_s = 4.0;
  double synth_jitter = 0.05;
  double synth_steepness = 6.0;

  // Ingest.
  LengthUnit unit = LengthUnit::kFeet;
  double frame_rate = 10.0;
  double test_minutes = 2.0;

  // Labeling.
  double delta_t = 2.0;
  double theta_bound = 2.0;
  double heading_smooth_window = 0.5;

  // Features.
  double gap_cap = 100.0;
  double headway_time = 1.5;
  bool augmented = false;

  // Segments and balancing.
  int n = 9;
  std::size_t max_per_class = 1000;
  bool balance_test = true;

  // Model and training.
  ModelKind model = ModelKind::kSaLstm;
  int embed_dim = 64;
  int hidden_dim = 128;
  std::vector<int> ffnn_hidden = {128, 64};
  std::uint64_t seed = 1;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kSgd;
  double learning_rate = 0.00125;
  int batch_size = 64;
  int max_epochs = 50;
  int patience = 5;
  double clip_norm = 5.0;
  double val_fraction = 0.1;

  // Evaluation.
  double horizon_s = 6.0;
  int consecutive = 3;

  // Sweep.
  std::vector<int> sweep_n = {6, 9, 12};
  std::vector<ModelKind> sweep_kinds = {ModelKind::kSaLstm, ModelKind::kFfnn,
                                        ModelKind::kLogReg};
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3};

  // Sets one key from its text form. Throws ConfigError for unknown keys or
  // unparsable values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  // Throws ConfigError on values outside their valid ranges.
  void validate() const;

  LabelingConfig labeling() const;
  FeatureConfig features() const;
  ModelSpec model_spec(ModelKind kind, int steps) const;
  nn::TrainConfig train_config(std::uint64_t train_seed) const;
  RandomScenarioOptions scenario_options(int sequence_index) const;
};

// All keys in serialization order.
const std::vector<std::string>& config_keys();

RunConfig parse_run_config(std::istream& in);
void write_run_config(std::ostream& out, const RunConfig& config);
std::string to_text(const RunConfig& config);

// Stages whose outputs depend on a subset of the keys.
enum class Stage { kSynth, kIngest, kLabel, kFeaturize, kTrain, kEval, kSweep };

std::string_view to_string(Stage stage);
// Keys a stage's output depends on, including those of upstream stages.
std::vector<std::string> stage_keys(Stage stage);
// FNV-1a of the "key=value" lines of stage_keys(stage), as 16 hex digits.
std::string stage_hash(const RunConfig& config, Stage stage);

}  // namespace lcp

#endif  // LCP_CONFIG_H_
