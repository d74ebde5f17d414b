#ifndef LCP_STAGES_H_
#define LCP_STAGES_H_

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lcp/config.h"
#include "lcp/eval.h"
#include "lcp/io.h"
#include "lcp/pipeline.h"

namespace lcp {

// Artifact layout under one run directory. Every stage writes a JSON sidecar
// with its config hash next to its outputs; downstream stages refuse
// artifacts whose hash disagrees with the current config.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path synth() const { return root / "synth"; }
  std::filesystem::path ingest() const { return root / "ingest"; }
  std::filesystem::path label() const { return root / "label"; }
  std::filesystem::path featurize() const { return root / "featurize"; }
  std::filesystem::path model(ModelKind kind, int n) const;
  std::filesystem::path eval(ModelKind kind, int n) const;
  std::filesystem::path sweep() const { return root / "sweep"; }
  std::filesystem::path replicate() const { return root / "replicate"; }
};

// Recorded trajectory tables plus the site file. Empty tables means "use the
// synth stage outputs".
struct IngestInputs {
  std::vector<std::filesystem::path> tables;
  std::filesystem::path site;
};

void stage_synth(const RunConfig& config, const RunLayout& layout,
                 std::ostream& log);
void stage_ingest(const RunConfig& config, const RunLayout& layout,
                  const IngestInputs& inputs, std::ostream& log);
void stage_label(const RunConfig& config, const RunLayout& layout,
                 std::ostream& log);
void stage_featurize(const RunConfig& config, const RunLayout& layout,
                     std::ostream& log);

struct TrainOutcome {
  TrainHistory history;
  double seconds = 0.0;
  std::filesystem::path dir;
};

// Trains config.model at config.n with config.seed.
TrainOutcome stage_train(const RunConfig& config, const RunLayout& layout,
                         std::ostream& log);

struct EvalOutcome {
  ConfusionMatrix cm;
  PredictionTimeReport timing;
  std::filesystem::path dir;
};

// Evaluates the checkpoint of config.model at config.n.
EvalOutcome stage_eval(const RunConfig& config, const RunLayout& layout,
                       std::ostream& log);

// Every (kind, n, seed) of the sweep lists. Rows already in `known` (same
// kind, n and seed under the same config) are reused instead of retrained.
std::vector<SweepRow> stage_sweep(const RunConfig& config,
                                  const RunLayout& layout, std::ostream& log,
                                  std::span<const SweepRow> known = {});

// synth (when inputs are empty) -> ingest -> label -> featurize, then train
// and eval every model kind at config.n, then the history-length sweep.
void stage_replicate(const RunConfig& config, const RunLayout& layout,
                     const IngestInputs& inputs, std::ostream& log);

// Featurized slices and normalization read back from the featurize stage.
Corpus load_corpus(const RunConfig& config, const RunLayout& layout);

// Stage sidecar skeleton: stage, config hash, full config, commit.
Json sidecar(const RunConfig& config, Stage stage);
// Throws IncompatibleError unless the sidecar's hash equals
// stage_hash(config, stage).
void check_sidecar(const Json& sidecar, const RunConfig& config, Stage stage,
                   const std::filesystem::path& file);

}  // namespace lcp

#endif  // LCP_STAGES_H_
