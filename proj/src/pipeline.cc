#include "lcp/pipeline.h"

#include <chrono>
#include <utility>

#include "lcp/errors.h"

namespace lcp {

ScenarioSpec synthetic_spec(const RunConfig& config, int k) {
  ScenarioSpec spec = random_scenario(config.scenario_options(k));
  spec.site_name = "synthetic";
  return spec;
}

std::vector<Scenario> synthetic_scenarios(const RunConfig& config) {
  config.validate();
  std::vector<Scenario> out;
  for (int k = 0; k < config.synth_sequences; ++k) {
    out.push_back(generate(synthetic_spec(config, k)));
  }
  return out;
}

std::vector<std::pair<Sequence, Sequence>> split_all(
    const std::vector<Sequence>& sequences, const RunConfig& config) {
  std::vector<std::pair<Sequence, Sequence>> out;
  for (const Sequence& seq : sequences) {
    out.push_back(split_sequence(seq, config.test_minutes, config.frame_rate));
  }
  return out;
}

SplitData label_and_featurize(Sequence sequence, const RunConfig& config) {
  SplitData data;
  data.sequence = std::move(sequence);
  data.labeled = label_sequence(data.sequence, config.labeling());
  data.features = compute_features(data.sequence, data.labeled.headings,
                                   config.features());
  return data;
}

Corpus prepare_corpus(const std::vector<Sequence>& sequences,
                      const RunConfig& config) {
  Corpus corpus;
  int k = 0;
  for (auto& [train, test] : split_all(sequences, config)) {
    corpus.train.push_back(label_and_featurize(std::move(train), config));
    corpus.train.back().name = "train_" + std::to_string(k);
    corpus.test.push_back(label_and_featurize(std::move(test), config));
    corpus.test.back().name = "test_" + std::to_string(k);
    ++k;
  }
  std::vector<FeatureRow> rows;
  for (const SplitData& s : corpus.train) {
    rows.insert(rows.end(), s.features.begin(), s.features.end());
  }
  corpus.stats =
      fit_normalization(rows, normalization_exempt(config.augmented));
  return corpus;
}

std::vector<Segment> slice_segments(std::span<const SplitData> slices,
                                    const NormalizationStats& stats, int n) {
  std::vector<Segment> out;
  for (const SplitData& s : slices) {
    auto segs = package_segments(s.labeled.labels, s.features, n);
    out.insert(out.end(), std::make_move_iterator(segs.begin()),
               std::make_move_iterator(segs.end()));
  }
  normalize_segments(out, stats);
  return out;
}

SegmentSets build_segments(const Corpus& corpus, const RunConfig& config,
                           int n, std::uint64_t seed) {
  SegmentSets sets;
  sets.n = n;
  const auto train = slice_segments(corpus.train, corpus.stats, n);
  sets.train = balance_classes(train, seed, config.max_per_class);
  auto test = slice_segments(corpus.test, corpus.stats, n);
  sets.test = config.balance_test ? balance_classes(test, seed + 1, 0)
                                  : std::move(test);
  return sets;
}

TrainedModel train_model(const SegmentSets& sets, const RunConfig& config,
                         ModelKind kind, std::uint64_t seed) {
  TrainedModel out;
  out.model = build(config.model_spec(kind, sets.n), seed);
  const auto start = std::chrono::steady_clock::now();
  out.history = train(*out.model, sets.train, config.train_config(seed));
  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return out;
}

}  // namespace lcp
