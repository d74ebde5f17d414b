#include "lcp/stages.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "lcp/errors.h"
#include "lcp/text_util.h"

namespace lcp {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSidecarName[] = {"synth.json",     "ingest.json",
                                        "label.json",     "features.json",
                                        "model.json",     "report.json",
                                        "sweep.json"};

const char* sidecar_name(Stage stage) {
  return kSidecarName[static_cast<int>(stage)];
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StageError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  if (!in) throw StageError("cannot read " + path.string());
  return in;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw StageError("failed writing " + path.string());
}

std::string run_name(ModelKind kind, int n) {
  return std::string(to_string(kind)) + "_n" + std::to_string(n);
}

Sequence read_table(const fs::path& path, const SiteGeometry& site,
                    LengthUnit unit) {
  std::ifstream in = open_in(path);
  try {
    return parse_trajectory_table(in, site, unit);
  } catch (const Error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SiteGeometry read_site(const fs::path& path) {
  std::ifstream in = open_in(path);
  try {
    return parse_site_config(in);
  } catch (const Error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_site(const fs::path& path, const SiteGeometry& site) {
  std::ofstream out = open_out(path);
  write_site_config(out, site);
  close_out(out, path);
}

void write_sequence(const fs::path& path, const Sequence& seq,
                    LengthUnit unit) {
  std::ofstream out = open_out(path);
  write_trajectory_table(out, seq, unit);
  close_out(out, path);
}

// Reads the sidecar of `stage` from `dir` and checks its hash.
Json upstream(const RunConfig& config, const fs::path& dir, Stage stage) {
  const fs::path file = dir / sidecar_name(stage);
  Json j = read_json(file);
  check_sidecar(j, config, stage, file);
  return j;
}

struct CsvReader {
  fs::path path;
  std::ifstream in;
  std::vector<std::string> header;
  int line = 1;

  explicit CsvReader(const fs::path& p) : path(p), in(open_in(p)) {
    std::string text;
    if (!std::getline(in, text)) throw DataError(p.string() + ": empty file");
    for (auto f : split(text, ',')) header.emplace_back(trim(f));
  }

  bool next(std::vector<std::string_view>& fields, std::string& buffer) {
    while (std::getline(in, buffer)) {
      ++line;
      if (trim(buffer).empty()) continue;
      fields = split(buffer, ',');
      if (fields.size() != header.size()) fail("expected " +
                                               std::to_string(header.size()) +
                                               " fields");
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(path.string() + ": line " + std::to_string(line) + ": " +
                    what);
  }

  int integer(std::string_view text) const {
    const auto v = parse_int(text);
    if (!v) fail("bad integer '" + std::string(text) + "'");
    return static_cast<int>(*v);
  }
  double real(std::string_view text) const {
    const auto v = parse_double(text);
    if (!v) fail("bad number '" + std::string(text) + "'");
    return *v;
  }
};

struct SliceRef {
  std::string name;
  bool test = false;
  fs::path table;
};

std::vector<SliceRef> ingest_slices(const Json& ingest, const RunLayout& layout) {
  std::vector<SliceRef> out;
  for (const auto& s : ingest.at("slices")) {
    out.push_back(SliceRef{s.at("name").get<std::string>(),
                           s.at("split").get<std::string>() == "test",
                           layout.ingest() / s.at("table").get<std::string>()});
  }
  return out;
}

std::map<std::string, std::size_t> slice_index(const Json& slices) {
  std::map<std::string, std::size_t> index;
  for (const auto& s : slices) {
    index.emplace(s.at("name").get<std::string>(), index.size());
  }
  return index;
}

std::size_t lookup_slice(const std::map<std::string, std::size_t>& index,
                         const CsvReader& csv, std::string_view name) {
  const auto it = index.find(std::string(name));
  if (it == index.end()) csv.fail("unknown slice '" + std::string(name) + "'");
  return it->second;
}

struct LabelRows {
  std::vector<StepLabel> labels;
  std::map<int, std::vector<double>> headings;
  std::vector<LaneChangeEvent> events;
};

std::vector<LabelRows> read_labels(const RunLayout& layout,
                                   const std::map<std::string, std::size_t>& index) {
  std::vector<LabelRows> out(index.size());
  {
    CsvReader csv(layout.label() / "labels.csv");
    std::vector<std::string_view> f;
    std::string buffer;
    while (csv.next(f, buffer)) {
      LabelRows& rows = out[lookup_slice(index, csv, f[0])];
      const auto label = parse_maneuver(f[3]);
      if (!label) csv.fail("bad label '" + std::string(f[3]) + "'");
      StepLabel l{csv.integer(f[1]), csv.integer(f[2]), *label};
      rows.labels.push_back(l);
      rows.headings[l.vehicle_id].push_back(csv.real(f[4]));
    }
  }
  CsvReader csv(layout.label() / "events.csv");
  std::vector<std::string_view> f;
  std::string buffer;
  while (csv.next(f, buffer)) {
    LabelRows& rows = out[lookup_slice(index, csv, f[0])];
    const auto dir = parse_direction(f[3]);
    if (!dir) csv.fail("bad direction '" + std::string(f[3]) + "'");
    LaneChangeEvent e;
    e.vehicle_id = csv.integer(f[1]);
    e.cross_frame = csv.integer(f[2]);
    e.direction = *dir;
    e.start_frame = csv.integer(f[4]);
    e.end_frame = csv.integer(f[5]);
    e.low_confidence = csv.integer(f[6]) != 0;
    rows.events.push_back(e);
  }
  return out;
}

void write_history(const fs::path& path, const TrainHistory& history) {
  std::ofstream out = open_out(path);
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const EpochStats& e : history.epochs) {
    out << e.epoch << "," << format_double(e.train_loss) << ","
        << format_double(e.train_accuracy) << "," << format_double(e.val_loss)
        << "," << format_double(e.val_accuracy) << "\n";
  }
  close_out(out, path);
}

Json confusion_json(const ConfusionMatrix& cm) {
  Json j;
  j["rows"] = "true class (Left, Follow, Right)";
  j["cols"] = "predicted class (Left, Follow, Right)";
  Json counts = Json::array(), percent = Json::array();
  for (int r = 0; r < kNumClasses; ++r) {
    Json crow = Json::array(), prow = Json::array();
    for (int c = 0; c < kNumClasses; ++c) {
      crow.push_back(cm.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
      prow.push_back(cm.percent(r, c));
    }
    counts.push_back(crow);
    percent.push_back(prow);
  }
  j["counts"] = counts;
  j["percent"] = percent;
  j["overall_percent"] = cm.overall();
  return j;
}

Json timing_json(const PredictionTimeReport& r) {
  Json j;
  j["events"] = r.events.size();
  j["predicted"] = r.predicted;
  j["late"] = r.late;
  j["missed"] = r.missed;
  j["false_alarms"] = r.false_alarms;
  j["mean_seconds"] = r.mean_seconds;
  j["median_seconds"] = r.median_seconds;
  j["mean_late_seconds"] = r.mean_late_seconds;
  j["miss_rate"] = r.miss_rate;
  return j;
}

Json reference_card() {
  Json j;
  j["model"] = "SA-LSTM";
  j["source"] = "published NGSIM results, row-normalized percent";
  j["use"] = "qualitative side-by-side comparison only, not a pass/fail target";
  j["percent"] = kReferenceSaLstmPercent;
  return j;
}

SweepRow sweep_row(ModelKind kind, int n, std::uint64_t seed,
                   const ConfusionMatrix& cm, const TrainHistory& history,
                   double seconds) {
  SweepRow row;
  row.kind = kind;
  row.n = n;
  row.seed = seed;
  row.cm = cm;
  row.epochs = static_cast<int>(history.epochs.size());
  row.best_epoch = history.best_epoch;
  row.train_seconds = seconds;
  return row;
}

}  // namespace

fs::path RunLayout::model(ModelKind kind, int n) const {
  return root / "train" / run_name(kind, n);
}

fs::path RunLayout::eval(ModelKind kind, int n) const {
  return root / "eval" / run_name(kind, n);
}

Json sidecar(const RunConfig& config, Stage stage) {
  Json j;
  j["stage"] = std::string(to_string(stage));
  j["format_version"] = 1;
  j["config_hash"] = stage_hash(config, stage);
  j["commit"] = std::string(build_commit());
  Json c;
  for (const std::string& key : config_keys()) c[key] = config.get(key);
  j["config"] = c;
  return j;
}

void check_sidecar(const Json& j, const RunConfig& config, Stage stage,
                   const fs::path& file) {
  const std::string expected = stage_hash(config, stage);
  const std::string got =
      j.contains("config_hash") && j.at("config_hash").is_string()
          ? j.at("config_hash").get<std::string>()
          : std::string("<none>");
  if (got != expected) {
    throw IncompatibleError(file.string() + " was produced with " +
                            std::string(to_string(stage)) + " config hash " +
                            got + " but the current config hashes to " +
                            expected + "; rerun the " +
                            std::string(to_string(stage)) + " stage");
  }
}

void stage_synth(const RunConfig& config, const RunLayout& layout,
                 std::ostream& log) {
  config.validate();
  fs::create_directories(layout.synth());
  Json j = sidecar(config, Stage::kSynth);
  j["unit"] = config.get("unit");
  j["site"] = "site.cfg";
  Json sequences = Json::array();
  const fs::path gt_path = layout.synth() / "ground_truth.csv";
  std::ofstream gt = open_out(gt_path);
  gt << "sequence,vehicle_id,cross_frame,direction,start_frame,end_frame\n";
  for (int k = 0; k < config.synth_sequences; ++k) {
    const ScenarioSpec spec = synthetic_spec(config, k);
    const Scenario scenario = generate(spec);
    if (k == 0) write_site(layout.synth() / "site.cfg", scenario.sequence.site());
    const std::string table = "sequence_" + std::to_string(k) + ".txt";
    const std::string script = "scenario_" + std::to_string(k) + ".txt";
    write_sequence(layout.synth() / table, scenario.sequence, config.unit);
    {
      std::ofstream out = open_out(layout.synth() / script);
      write_scenario(out, spec);
      close_out(out, layout.synth() / script);
    }
    for (const LaneChangeEvent& e : scenario.ground_truth) {
      gt << k << "," << e.vehicle_id << "," << e.cross_frame << ","
         << to_string(e.direction) << "," << e.start_frame << ","
         << e.end_frame << "\n";
    }
    sequences.push_back(Json{{"table", table},
                             {"scenario", script},
                             {"vehicles", scenario.sequence.vehicle_count()},
                             {"frames", scenario.sequence.frame_count()},
                             {"events", scenario.ground_truth.size()}});
    log << "synth: sequence " << k << ": " << scenario.sequence.vehicle_count()
        << " vehicles, " << scenario.ground_truth.size()
        << " scripted lane changes\n";
  }
  close_out(gt, gt_path);
  j["sequences"] = sequences;
  j["ground_truth"] = "ground_truth.csv";
  write_json(layout.synth() / sidecar_name(Stage::kSynth), j);
}

void stage_ingest(const RunConfig& config, const RunLayout& layout,
                  const IngestInputs& inputs, std::ostream& log) {
  config.validate();
  std::vector<fs::path> tables = inputs.tables;
  fs::path site_path = inputs.site;
  if (tables.empty()) {
    const Json synth = upstream(config, layout.synth(), Stage::kSynth);
    for (const auto& s : synth.at("sequences")) {
      tables.push_back(layout.synth() / s.at("table").get<std::string>());
    }
    site_path = layout.synth() / synth.at("site").get<std::string>();
  } else if (site_path.empty()) {
    throw StageError("ingest: a site file is required with explicit tables");
  }
  const SiteGeometry site = read_site(site_path);
  fs::create_directories(layout.ingest());
  write_site(layout.ingest() / "site.cfg", site);

  Json j = sidecar(config, Stage::kIngest);
  j["site"] = "site.cfg";
  j["site_source"] = site_path.string();
  Json slices = Json::array();
  for (std::size_t k = 0; k < tables.size(); ++k) {
    const Sequence seq = read_table(tables[k], site, config.unit);
    auto [train, test] =
        split_sequence(seq, config.test_minutes, config.frame_rate);
    const std::string suffix = "_" + std::to_string(k);
    for (const auto& [split, part] :
         {std::pair<std::string, const Sequence*>{"train", &train},
          std::pair<std::string, const Sequence*>{"test", &test}}) {
      const std::string table = split + suffix + ".txt";
      write_sequence(layout.ingest() / table, *part, LengthUnit::kMeters);
      slices.push_back(Json{{"name", split + suffix},
                            {"split", split},
                            {"table", table},
                            {"source", tables[k].string()},
                            {"vehicles", part->vehicle_count()},
                            {"states", part->state_count()}});
    }
    log << "ingest: " << tables[k].string() << ": " << seq.vehicle_count()
        << " vehicles, train " << train.state_count() << " states, test "
        << test.state_count() << " states\n";
  }
  j["slices"] = slices;
  write_json(layout.ingest() / sidecar_name(Stage::kIngest), j);
}

void stage_label(const RunConfig& config, const RunLayout& layout,
                 std::ostream& log) {
  config.validate();
  const Json ingest = upstream(config, layout.ingest(), Stage::kIngest);
  const SiteGeometry site =
      read_site(layout.ingest() / ingest.at("site").get<std::string>());
  fs::create_directories(layout.label());
  const fs::path labels_path = layout.label() / "labels.csv";
  const fs::path events_path = layout.label() / "events.csv";
  std::ofstream labels = open_out(labels_path);
  std::ofstream events = open_out(events_path);
  labels << "slice,vehicle_id,frame,label,heading_deg\n";
  events << "slice,vehicle_id,cross_frame,direction,start_frame,end_frame,"
            "low_confidence\n";

  Json j = sidecar(config, Stage::kLabel);
  Json slices = Json::array();
  for (const SliceRef& ref : ingest_slices(ingest, layout)) {
    const Sequence seq = read_table(ref.table, site, LengthUnit::kMeters);
    const LabeledSequence labeled = label_sequence(seq, config.labeling());
    std::map<int, std::size_t> cursor;
    std::array<std::size_t, kNumClasses> counts{};
    for (const StepLabel& l : labeled.labels) {
      const double heading = labeled.headings.at(l.vehicle_id)[cursor[l.vehicle_id]++];
      labels << ref.name << "," << l.vehicle_id << "," << l.frame << ","
             << to_string(l.label) << "," << format_double(heading) << "\n";
      ++counts[static_cast<std::size_t>(class_index(l.label))];
    }
    std::size_t low = 0;
    for (const LaneChangeEvent& e : labeled.events) {
      events << ref.name << "," << e.vehicle_id << "," << e.cross_frame << ","
             << to_string(e.direction) << "," << e.start_frame << ","
             << e.end_frame << "," << (e.low_confidence ? 1 : 0) << "\n";
      low += e.low_confidence ? 1 : 0;
    }
    slices.push_back(Json{{"name", ref.name},
                          {"split", ref.test ? "test" : "train"},
                          {"events", labeled.events.size()},
                          {"low_confidence_events", low},
                          {"frames_left", counts[0]},
                          {"frames_follow", counts[1]},
                          {"frames_right", counts[2]}});
    log << "label: " << ref.name << ": " << labeled.events.size()
        << " lane changes (" << low << " low confidence), frames L/F/R "
        << counts[0] << "/" << counts[1] << "/" << counts[2] << "\n";
  }
  close_out(labels, labels_path);
  close_out(events, events_path);
  j["slices"] = slices;
  j["labels"] = "labels.csv";
  j["events"] = "events.csv";
  write_json(layout.label() / sidecar_name(Stage::kLabel), j);
}

void stage_featurize(const RunConfig& config, const RunLayout& layout,
                     std::ostream& log) {
  config.validate();
  const Json label = upstream(config, layout.label(), Stage::kLabel);
  const Json ingest = upstream(config, layout.ingest(), Stage::kIngest);
  const SiteGeometry site =
      read_site(layout.ingest() / ingest.at("site").get<std::string>());
  const std::vector<SliceRef> refs = ingest_slices(ingest, layout);
  const auto index = slice_index(label.at("slices"));
  const std::vector<LabelRows> rows = read_labels(layout, index);

  const FeatureConfig fc = config.features();
  const std::size_t dim = static_cast<std::size_t>(fc.dim());
  DoubleTable table;
  table.cols = 3 + dim;
  std::vector<FeatureRow> training;
  Json slices = Json::array();
  for (const SliceRef& ref : refs) {
    const auto it = index.find(ref.name);
    if (it == index.end()) {
      throw IncompatibleError("featurize: slice " + ref.name +
                              " has no labels; rerun label");
    }
    const Sequence seq = read_table(ref.table, site, LengthUnit::kMeters);
    const LabelRows& lr = rows[it->second];
    for (int id : seq.vehicle_ids()) {
      const auto h = lr.headings.find(id);
      if (h == lr.headings.end() || h->second.size() != seq.trajectory(id).size()) {
        throw IncompatibleError("featurize: labels of " + ref.name +
                                " do not cover vehicle " + std::to_string(id) +
                                "; rerun label");
      }
    }
    const FeatureTable features = compute_features(seq, lr.headings, fc);
    for (const FeatureRow& f : features) {
      table.data.push_back(static_cast<double>(it->second));
      table.data.push_back(f.vehicle_id);
      table.data.push_back(f.frame);
      table.data.insert(table.data.end(), f.values.begin(), f.values.end());
    }
    table.rows += features.size();
    if (!ref.test) training.insert(training.end(), features.begin(), features.end());
    slices.push_back(Json{{"name", ref.name},
                          {"split", ref.test ? "test" : "train"},
                          {"rows", features.size()}});
  }
  const NormalizationStats stats =
      fit_normalization(training, normalization_exempt(fc.augmented));
  fs::create_directories(layout.featurize());
  write_double_table(layout.featurize() / "features.bin", table);

  Json j = sidecar(config, Stage::kFeaturize);
  j["features"] = "features.bin";
  j["dim"] = dim;
  Json columns = Json::array({"slice", "vehicle_id", "frame"});
  for (const std::string& name : feature_names(fc.augmented)) columns.push_back(name);
  j["columns"] = columns;
  j["slices"] = slices;
  j["normalization"] = to_json(stats);
  write_json(layout.featurize() / sidecar_name(Stage::kFeaturize), j);
  log << "featurize: " << table.rows << " rows x " << dim << " features, "
      << stats.constant_dims.size() << " constant dims\n";
}

Corpus load_corpus(const RunConfig& config, const RunLayout& layout) {
  const Json fj = upstream(config, layout.featurize(), Stage::kFeaturize);
  const fs::path bin = layout.featurize() / fj.at("features").get<std::string>();
  const DoubleTable table = read_double_table(bin);
  const std::size_t dim = fj.at("dim").get<std::size_t>();
  if (table.cols != 3 + dim) {
    throw FormatError(bin.string() + ": " + std::to_string(table.cols) +
                      " columns, sidecar says " + std::to_string(3 + dim));
  }
  const auto index = slice_index(fj.at("slices"));
  std::vector<LabelRows> labels = read_labels(layout, index);

  std::vector<SplitData> slices(index.size());
  std::vector<bool> is_test(index.size());
  for (const auto& s : fj.at("slices")) {
    const std::size_t k = index.at(s.at("name").get<std::string>());
    slices[k].name = s.at("name").get<std::string>();
    is_test[k] = s.at("split").get<std::string>() == "test";
    slices[k].labeled.labels = std::move(labels[k].labels);
    slices[k].labeled.events = std::move(labels[k].events);
    slices[k].labeled.headings = std::move(labels[k].headings);
  }
  for (std::size_t r = 0; r < table.rows; ++r) {
    const std::size_t k = static_cast<std::size_t>(table.at(r, 0));
    if (k >= slices.size()) throw FormatError(bin.string() + ": bad slice index");
    FeatureRow row;
    row.vehicle_id = static_cast<int>(table.at(r, 1));
    row.frame = static_cast<int>(table.at(r, 2));
    const double* begin = table.data.data() + r * table.cols + 3;
    row.values.assign(begin, begin + dim);
    slices[k].features.push_back(std::move(row));
  }
  Corpus corpus;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    (is_test[k] ? corpus.test : corpus.train).push_back(std::move(slices[k]));
  }
  corpus.stats = stats_from_json(fj.at("normalization"));
  return corpus;
}

TrainOutcome stage_train(const RunConfig& config, const RunLayout& layout,
                         std::ostream& log) {
  config.validate();
  const Corpus corpus = load_corpus(config, layout);
  const SegmentSets sets = build_segments(corpus, config, config.n, config.seed);
  const TrainedModel trained =
      train_model(sets, config, config.model, config.seed);

  TrainOutcome out;
  out.history = trained.history;
  out.seconds = trained.seconds;
  out.dir = layout.model(config.model, config.n);
  fs::create_directories(out.dir);
  save_checkpoint(out.dir / "model.lcpm", *trained.model);
  write_history(out.dir / "history.csv", trained.history);

  Json j = sidecar(config, Stage::kTrain);
  j["checkpoint"] = "model.lcpm";
  j["checkpoint_version"] = kCheckpointFormatVersion;
  j["history"] = "history.csv";
  j["spec"] = to_json(trained.model->spec());
  j["seed"] = config.seed;
  j["normalization_hash"] = hex64(corpus.stats.hash());
  j["normalization"] = to_json(corpus.stats);
  j["train_segments"] = sets.train.size();
  j["epochs_run"] = trained.history.epochs.size();
  j["best_epoch"] = trained.history.best_epoch;
  j["early_stopped"] = trained.history.early_stopped;
  j["train_size"] = trained.history.train_size;
  j["val_size"] = trained.history.val_size;
  j["train_seconds"] = trained.seconds;
  write_json(out.dir / sidecar_name(Stage::kTrain), j);

  log << "train: " << display_name(config.model) << " n=" << config.n
      << " seed=" << config.seed << ": " << sets.train.size()
      << " segments, " << trained.history.epochs.size() << " epochs (best "
      << trained.history.best_epoch << ")";
  if (!trained.history.epochs.empty()) {
    log << ", val acc "
        << format_fixed(100.0 * trained.history.epochs.back().val_accuracy) << "%";
  }
  log << ", " << format_fixed(trained.seconds) << " s\n";
  return out;
}

EvalOutcome stage_eval(const RunConfig& config, const RunLayout& layout,
                       std::ostream& log) {
  config.validate();
  const fs::path model_dir = layout.model(config.model, config.n);
  const Json mj = upstream(config, model_dir, Stage::kTrain);
  const auto model = load_checkpoint(model_dir / mj.at("checkpoint").get<std::string>());
  const Corpus corpus = load_corpus(config, layout);
  if (mj.at("normalization_hash").get<std::string>() != hex64(corpus.stats.hash())) {
    throw IncompatibleError(model_dir.string() +
                            ": model was trained with different normalization "
                            "statistics; rerun train");
  }
  const SegmentSets sets = build_segments(corpus, config, config.n, config.seed);

  EvalOutcome out;
  out.dir = layout.eval(config.model, config.n);
  out.cm = confusion(*model, sets.test);

  std::vector<std::string> event_slice;
  for (const SplitData& slice : corpus.test) {
    const std::vector<Segment> segs =
        slice_segments(std::span<const SplitData>(&slice, 1), corpus.stats, config.n);
    const std::vector<Maneuver> predicted = classify_all(*model, segs);
    const auto points = prediction_points(segs, predicted, config.consecutive);
    const PredictionTimeReport r = prediction_time(
        points, slice.labeled.events, config.frame_rate, config.horizon_s);
    out.timing.events.insert(out.timing.events.end(), r.events.begin(),
                             r.events.end());
    out.timing.false_alarms += r.false_alarms;
    event_slice.insert(event_slice.end(), r.events.size(), slice.name);
  }
  summarize_timings(out.timing);

  fs::create_directories(out.dir);
  {
    const fs::path path = out.dir / "confusion.csv";
    std::ofstream csv = open_out(path);
    write_confusion_csv(csv, out.cm);
    close_out(csv, path);
  }
  {
    const fs::path path = out.dir / "event_timing.csv";
    std::ofstream csv = open_out(path);
    csv << "slice,vehicle_id,direction,cross_frame,outcome,prediction_frame,"
           "seconds\n";
    for (std::size_t i = 0; i < out.timing.events.size(); ++i) {
      const EventTiming& t = out.timing.events[i];
      csv << event_slice[i] << "," << t.event.vehicle_id << ","
          << to_string(t.event.direction) << "," << t.event.cross_frame << ","
          << to_string(t.outcome) << "," << t.prediction_frame << ","
          << format_fixed(t.seconds) << "\n";
    }
    close_out(csv, path);
  }
  Json j = sidecar(config, Stage::kEval);
  j["model"] = std::string(display_name(config.model));
  j["spec"] = mj.at("spec");
  j["model_config_hash"] = mj.at("config_hash");
  j["normalization_hash"] = mj.at("normalization_hash");
  j["test_segments"] = sets.test.size();
  j["balanced_test"] = config.balance_test;
  j["confusion"] = confusion_json(out.cm);
  j["prediction_time"] = timing_json(out.timing);
  j["reference"] = reference_card();
  write_json(out.dir / sidecar_name(Stage::kEval), j);

  log << "eval: " << display_name(config.model) << " n=" << config.n << ": "
      << format_fixed(out.cm.overall()) << "% on " << sets.test.size()
      << " test segments; " << out.timing.predicted << "/"
      << out.timing.events.size() << " lane changes predicted ahead, mean "
      << format_fixed(out.timing.mean_seconds) << " s\n";
  return out;
}

std::vector<SweepRow> stage_sweep(const RunConfig& config,
                                  const RunLayout& layout, std::ostream& log,
                                  std::span<const SweepRow> known) {
  config.validate();
  const Corpus corpus = load_corpus(config, layout);
  std::vector<SweepRow> rows;
  for (int n : config.sweep_n) {
    for (std::uint64_t seed : config.sweep_seeds) {
      const SegmentSets sets = build_segments(corpus, config, n, seed);
      for (ModelKind kind : config.sweep_kinds) {
        const auto hit = std::find_if(known.begin(), known.end(), [&](const SweepRow& r) {
          return r.kind == kind && r.n == n && r.seed == seed;
        });
        if (hit != known.end()) {
          rows.push_back(*hit);
          continue;
        }
        const TrainedModel trained = train_model(sets, config, kind, seed);
        rows.push_back(sweep_row(kind, n, seed, confusion(*trained.model, sets.test),
                                 trained.history, trained.seconds));
        log << "sweep: " << display_name(kind) << " n=" << n << " seed=" << seed
            << ": " << format_fixed(rows.back().cm.overall()) << "% ("
            << format_fixed(trained.seconds) << " s)\n";
      }
    }
  }
  const auto kind_rank = [&](ModelKind k) {
    return std::find(config.sweep_kinds.begin(), config.sweep_kinds.end(), k) -
           config.sweep_kinds.begin();
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const SweepRow& a, const SweepRow& b) {
    return std::make_tuple(kind_rank(a.kind), a.n) <
           std::make_tuple(kind_rank(b.kind), b.n);
  });
  const std::vector<SweepSummary> summary = summarize(rows);

  fs::create_directories(layout.sweep());
  const auto emit = [&](const char* name, auto&& writer) {
    const fs::path path = layout.sweep() / name;
    std::ofstream out = open_out(path);
    writer(out);
    close_out(out, path);
  };
  emit("sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, rows); });
  emit("sweep_summary.csv", [&](std::ostream& o) { write_sweep_summary_csv(o, summary); });
  emit("sweep_timing.csv", [&](std::ostream& o) { write_sweep_timing_csv(o, rows); });
  emit("sweep.svg", [&](std::ostream& o) { write_sweep_svg(o, summary); });
  emit("sweep_confusion.csv", [&](std::ostream& o) {
    o << "model,n,seed,true,pct_left,pct_follow,pct_right,row_sum\n";
    for (const SweepRow& r : rows) {
      for (int t = 0; t < kNumClasses; ++t) {
        o << display_name(r.kind) << "," << r.n << "," << r.seed << ","
          << to_string(maneuver_from_index(t));
        double sum = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
          o << "," << format_fixed(r.cm.percent(t, c));
          sum += r.cm.percent(t, c);
        }
        o << "," << format_fixed(sum) << "\n";
      }
    }
  });
  Json j = sidecar(config, Stage::kSweep);
  Json js = Json::array();
  for (const SweepSummary& s : summary) {
    js.push_back(Json{{"model", std::string(display_name(s.kind))},
                      {"n", s.n},
                      {"runs", s.runs},
                      {"mean_overall", s.mean_overall},
                      {"std_overall", s.std_overall}});
  }
  j["summary"] = js;
  Json jr = Json::array();
  for (const SweepRow& r : rows) {
    jr.push_back(Json{{"model", std::string(display_name(r.kind))},
                      {"n", r.n},
                      {"seed", r.seed},
                      {"confusion", confusion_json(r.cm)},
                      {"epochs", r.epochs},
                      {"best_epoch", r.best_epoch},
                      {"train_seconds", r.train_seconds}});
  }
  j["runs"] = jr;
  write_json(layout.sweep() / sidecar_name(Stage::kSweep), j);
  for (const SweepSummary& s : summary) {
    log << "sweep: " << display_name(s.kind) << " n=" << s.n << ": mean "
        << format_fixed(s.mean_overall) << "% sd " << format_fixed(s.std_overall)
        << " over " << s.runs << " seeds\n";
  }
  return rows;
}

void stage_replicate(const RunConfig& config, const RunLayout& layout,
                     const IngestInputs& inputs, std::ostream& log) {
  config.validate();
  if (inputs.tables.empty()) stage_synth(config, layout, log);
  stage_ingest(config, layout, inputs, log);
  stage_label(config, layout, log);
  stage_featurize(config, layout, log);

  std::vector<SweepRow> known;
  Json models = Json::array();
  std::vector<std::pair<ModelKind, EvalOutcome>> table;
  for (ModelKind kind : kAllModelKinds) {
    RunConfig c = config;
    c.model = kind;
    const TrainOutcome t = stage_train(c, layout, log);
    const EvalOutcome e = stage_eval(c, layout, log);
    known.push_back(sweep_row(kind, c.n, c.seed, e.cm, t.history, t.seconds));
    table.emplace_back(kind, e);
    models.push_back(Json{{"model", std::string(display_name(kind))},
                          {"n", c.n},
                          {"seed", c.seed},
                          {"train_seconds", t.seconds},
                          {"epochs_run", t.history.epochs.size()},
                          {"best_epoch", t.history.best_epoch},
                          {"confusion", confusion_json(e.cm)},
                          {"prediction_time", timing_json(e.timing)}});
  }
  const std::vector<SweepRow> rows = stage_sweep(config, layout, log, known);

  fs::create_directories(layout.replicate());
  {
    const fs::path path = layout.replicate() / "model_comparison.csv";
    std::ofstream out = open_out(path);
    out << "model,true,pred_left,pred_follow,pred_right,overall\n";
    for (const auto& [kind, e] : table) {
      for (int r = 0; r < kNumClasses; ++r) {
        out << display_name(kind) << "," << to_string(maneuver_from_index(r));
        for (int c = 0; c < kNumClasses; ++c) out << "," << format_fixed(e.cm.percent(r, c));
        out << "," << format_fixed(e.cm.overall()) << "\n";
      }
    }
    for (int r = 0; r < kNumClasses; ++r) {
      out << "SA-LSTM (reference)," << to_string(maneuver_from_index(r));
      for (double v : kReferenceSaLstmPercent[static_cast<std::size_t>(r)]) {
        out << "," << format_fixed(v);
      }
      out << ",\n";
    }
    close_out(out, path);
  }
  {
    const fs::path path = layout.replicate() / "prediction_time.csv";
    std::ofstream out = open_out(path);
    out << "model,events,predicted,late,missed,false_alarms,mean_seconds,"
           "median_seconds,mean_late_seconds,miss_rate\n";
    for (const auto& [kind, e] : table) {
      const PredictionTimeReport& r = e.timing;
      out << display_name(kind) << "," << r.events.size() << "," << r.predicted
          << "," << r.late << "," << r.missed << "," << r.false_alarms << ","
          << format_fixed(r.mean_seconds) << "," << format_fixed(r.median_seconds)
          << "," << format_fixed(r.mean_late_seconds) << ","
          << format_fixed(r.miss_rate) << "\n";
    }
    close_out(out, path);
  }
  Json j = sidecar(config, Stage::kSweep);
  j["data"] = inputs.tables.empty() ? "synthetic" : "recorded";
  j["models"] = models;
  j["reference"] = reference_card();
  Json js = Json::array();
  for (const SweepSummary& s : summarize(rows)) {
    js.push_back(Json{{"model", std::string(display_name(s.kind))},
                      {"n", s.n},
                      {"runs", s.runs},
                      {"mean_overall", s.mean_overall},
                      {"std_overall", s.std_overall}});
  }
  j["sweep_summary"] = js;
  write_json(layout.replicate() / "report.json", j);
  log << "replicate: wrote " << (layout.replicate() / "model_comparison.csv").string()
      << "\n";
}

}  // namespace lcp
