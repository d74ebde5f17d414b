#ifndef LCP_PIPELINE_H_
#define LCP_PIPELINE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lcp/config.h"
#include "lcp/features.h"
#include "lcp/ingest.h"
#include "lcp/labeling.h"
#include "lcp/models.h"
#include "lcp/segment.h"
#include "lcp/synthetic.h"

namespace lcp {

// One train or test slice of a recording, labeled and featurized.
struct SplitData {
  std::string name;
  Sequence sequence;
  LabeledSequence labeled;
  FeatureTable features;
};

struct Corpus {
  std::vector<SplitData> train;
  std::vector<SplitData> test;
  // Fit on every feature row of the training slices.
  NormalizationStats stats;
};

// Scenario script of synthetic sequence k.
ScenarioSpec synthetic_spec(const RunConfig& config, int k);

// config.synth_sequences scenarios from scenario_options(0..k-1).
std::vector<Scenario> synthetic_scenarios(const RunConfig& config);

// Test slice = first test_minutes of each sequence, train = the rest.
std::vector<std::pair<Sequence, Sequence>> split_all(
    const std::vector<Sequence>& sequences, const RunConfig& config);

SplitData label_and_featurize(Sequence sequence, const RunConfig& config);

// Splits, labels and featurizes every sequence and fits normalization.
Corpus prepare_corpus(const std::vector<Sequence>& sequences,
                      const RunConfig& config);

// Normalized segments of every slice, in slice order.
std::vector<Segment> slice_segments(std::span<const SplitData> slices,
                                    const NormalizationStats& stats, int n);

struct SegmentSets {
  int n = 0;
  std::vector<Segment> train;
  std::vector<Segment> test;
};

// Train segments balanced with max_per_class; test segments balanced too
// when balance_test is set. Both normalized with the corpus stats.
SegmentSets build_segments(const Corpus& corpus, const RunConfig& config,
                           int n, std::uint64_t seed);

struct TrainedModel {
  std::unique_ptr<Model> model;
  TrainHistory history;
  double seconds = 0.0;
};

// Builds config.model_spec(kind, sets.n) with the seed and trains it on
// sets.train.
TrainedModel train_model(const SegmentSets& sets, const RunConfig& config,
                         ModelKind kind, std::uint64_t seed);

}  // namespace lcp

#endif  // LCP_PIPELINE_H_
