#include "lcp/config.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "lcp/errors.h"
#include "lcp/text_util.h"

namespace lcp {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("config: bad value '" + std::string(value) + "' for '" +
                    std::string(key) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v) bad_value(key, value);
  return *v;
}

long long to_int(std::string_view key, std::string_view value) {
  const auto v = parse_int(value);
  if (!v) bad_value(key, value);
  return *v;
}

std::uint64_t to_seed(std::string_view key, std::string_view value) {
  const long long v = to_int(key, value);
  if (v < 0) bad_value(key, value);
  return static_cast<std::uint64_t>(v);
}

template <typename T, typename Parse>
std::vector<T> to_list(std::string_view key, std::string_view value,
                       Parse parse) {
  std::vector<T> out;
  for (std::string_view item : split(value, ',')) {
    item = trim(item);
    if (item.empty()) bad_value(key, value);
    out.push_back(parse(item));
  }
  if (out.empty()) bad_value(key, value);
  return out;
}

template <typename T, typename Format>
std::string join(const std::vector<T>& items, Format format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += format(items[i]);
  }
  return out;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string name;
  Stage stage;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define LCP_REAL(member, stage)                                          \
  Field {                                                                \
    #member, stage,                                                      \
        [](RunConfig& c, std::string_view v) {                           \
          c.member = to_double(#member, v);                              \
        },                                                               \
        [](const RunConfig& c) { return fmt(c.member); }                 \
  }
#define LCP_INT(member, stage)                                           \
  Field {                                                                \
    #member, stage,                                                      \
        [](RunConfig& c, std::string_view v) {                           \
          c.member = static_cast<decltype(c.member)>(to_int(#member, v)); \
        },                                                               \
        [](const RunConfig& c) { return std::to_string(c.member); }      \
  }
#define LCP_SEED(member, stage)                                          \
  Field {                                                                \
    #member, stage,                                                      \
        [](RunConfig& c, std::string_view v) {                           \
          c.member = to_seed(#member, v);                                \
        },                                                               \
        [](const RunConfig& c) { return std::to_string(c.member); }      \
  }
#define LCP_BOOL(member, stage)                                          \
  Field {                                                                \
    #member, stage,                                                      \
        [](RunConfig& c, std::string_view v) {                           \
          const auto b = parse_bool(v);                                  \
          if (!b) bad_value(#member, v);                                 \
          c.member = *b;                                                 \
        },                                                               \
        [](const RunConfig& c) { return fmt_bool(c.member); }            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        LCP_SEED(synth_seed, Stage::kSynth),
        LCP_INT(synth_sequences, Stage::kSynth),
        LCP_REAL(synth_duration_s, Stage::kSynth),
        LCP_INT(synth_lanes, Stage::kSynth),
        LCP_REAL(synth_lane_width, Stage::kSynth),
        LCP_REAL(synth_entry_gap_s, Stage::kSynth),
        LCP_REAL(synth_change_probability, Stage::kSynth),
        LCP_REAL(synth_change_duration_s, Stage::kSynth),
        LCP_REAL(synth_jitter, Stage::kSynth),
        LCP_REAL(synth_steepness, Stage::kSynth),
        Field{"unit", Stage::kIngest,
              [](RunConfig& c, std::string_view v) {
                const auto u = parse_length_unit(v);
                if (!u) bad_value("unit", v);
                c.unit = *u;
              },
              [](const RunConfig& c) {
                return std::string(c.unit == LengthUnit::kFeet ? "feet"
                                                               : "meters");
              }},
        LCP_REAL(frame_rate, Stage::kIngest),
        LCP_REAL(test_minutes, Stage::kIngest),
        LCP_REAL(delta_t, Stage::kLabel),
        LCP_REAL(theta_bound, Stage::kLabel),
        LCP_REAL(heading_smooth_window, Stage::kLabel),
        LCP_REAL(gap_cap, Stage::kFeaturize),
        LCP_REAL(headway_time, Stage::kFeaturize),
        LCP_BOOL(augmented, Stage::kFeaturize),
        LCP_INT(n, Stage::kTrain),
        LCP_INT(max_per_class, Stage::kTrain),
        Field{"model", Stage::kTrain,
              [](RunConfig& c, std::string_view v) {
                const auto k = parse_model_kind(v);
                if (!k) bad_value("model", v);
                c.model = *k;
              },
              [](const RunConfig& c) { return std::string(to_string(c.model)); }},
        LCP_INT(embed_dim, Stage::kTrain),
        LCP_INT(hidden_dim, Stage::kTrain),
        Field{"ffnn_hidden", Stage::kTrain,
              [](RunConfig& c, std::string_view v) {
                c.ffnn_hidden = to_list<int>("ffnn_hidden", v, [&](auto s) {
                  return static_cast<int>(to_int("ffnn_hidden", s));
                });
              },
              [](const RunConfig& c) {
                return join(c.ffnn_hidden,
                            [](int w) { return std::to_string(w); });
              }},
        LCP_SEED(seed, Stage::kTrain),
        Field{"optimizer", Stage::kTrain,
              [](RunConfig& c, std::string_view v) {
                const auto o = nn::parse_optimizer(v);
                if (!o) bad_value("optimizer", v);
                c.optimizer = *o;
              },
              [](const RunConfig& c) {
                return std::string(nn::to_string(c.optimizer));
              }},
        LCP_REAL(learning_rate, Stage::kTrain),
        LCP_INT(batch_size, Stage::kTrain),
        LCP_INT(max_epochs, Stage::kTrain),
        LCP_INT(patience, Stage::kTrain),
        LCP_REAL(clip_norm, Stage::kTrain),
        LCP_REAL(val_fraction, Stage::kTrain),
        LCP_BOOL(balance_test, Stage::kEval),
        LCP_REAL(horizon_s, Stage::kEval),
        LCP_INT(consecutive, Stage::kEval),
        Field{"sweep_n", Stage::kSweep,
              [](RunConfig& c, std::string_view v) {
                c.sweep_n = to_list<int>("sweep_n", v, [&](auto s) {
                  return static_cast<int>(to_int("sweep_n", s));
                });
              },
              [](const RunConfig& c) {
                return join(c.sweep_n, [](int n) { return std::to_string(n); });
              }},
        Field{"sweep_kinds", Stage::kSweep,
              [](RunConfig& c, std::string_view v) {
                c.sweep_kinds = to_list<ModelKind>("sweep_kinds", v, [&](auto s) {
                  const auto k = parse_model_kind(s);
                  if (!k) bad_value("sweep_kinds", v);
                  return *k;
                });
              },
              [](const RunConfig& c) {
                return join(c.sweep_kinds, [](ModelKind k) {
                  return std::string(to_string(k));
                });
              }},
        Field{"sweep_seeds", Stage::kSweep,
              [](RunConfig& c, std::string_view v) {
                c.sweep_seeds = to_list<std::uint64_t>(
                    "sweep_seeds", v, [&](auto s) { return to_seed("sweep_seeds", s); });
              },
              [](const RunConfig& c) {
                return join(c.sweep_seeds,
                            [](std::uint64_t s) { return std::to_string(s); });
              }},
    };
    return f;
  }();
  return table;
}

#undef LCP_REAL
#undef LCP_INT
#undef LCP_SEED
#undef LCP_BOOL

const Field& field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.name == key) return f;
  }
  throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, trim(value));
}

std::string RunConfig::get(std::string_view key) const {
  return field(key).get(*this);
}

void RunConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  require(synth_sequences >= 1, "synth_sequences must be >= 1");
  require(synth_duration_s > 0, "synth_duration_s must be > 0");
  require(synth_lanes >= 2, "synth_lanes must be >= 2");
  require(synth_lane_width > 0, "synth_lane_width must be > 0");
  require(synth_entry_gap_s > 0, "synth_entry_gap_s must be > 0");
  require(synth_change_probability >= 0 && synth_change_probability <= 1,
          "synth_change_probability must be in [0, 1]");
  require(synth_change_duration_s > 0, "synth_change_duration_s must be > 0");
  require(frame_rate > 0, "frame_rate must be > 0");
  require(test_minutes >= 0, "test_minutes must be >= 0");
  require(delta_t > 0, "delta_t must be > 0");
  require(theta_bound >= 0, "theta_bound must be >= 0");
  require(heading_smooth_window > 0, "heading_smooth_window must be > 0");
  require(gap_cap > kMinNeighborGap, "gap_cap must exceed the minimum gap");
  require(headway_time > 0, "headway_time must be > 0");
  require(n >= 2, "n must be >= 2");
  require(embed_dim >= 1 && hidden_dim >= 1, "model sizes must be >= 1");
  require(learning_rate > 0, "learning_rate must be > 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(max_epochs >= 0, "max_epochs must be >= 0");
  require(patience >= 1, "patience must be >= 1");
  require(val_fraction >= 0 && val_fraction < 1, "val_fraction must be in [0, 1)");
  require(horizon_s > 0, "horizon_s must be > 0");
  require(consecutive >= 1, "consecutive must be >= 1");
  for (int s : sweep_n) require(s >= 2, "sweep_n entries must be >= 2");
}

LabelingConfig RunConfig::labeling() const {
  LabelingConfig c;
  c.delta_t = delta_t;
  c.theta_bound = theta_bound;
  c.heading_smooth_window = heading_smooth_window;
  c.n = n;
  c.frame_rate = frame_rate;
  return c;
}

FeatureConfig RunConfig::features() const {
  FeatureConfig c;
  c.gap_cap = gap_cap;
  c.headway_time = headway_time;
  c.augmented = augmented;
  return c;
}

ModelSpec RunConfig::model_spec(ModelKind kind, int steps) const {
  ModelSpec s;
  s.kind = kind;
  s.input_dim = features().dim();
  s.embed_dim = embed_dim;
  s.hidden_dim = hidden_dim;
  s.n = steps;
  s.augmented = augmented;
  s.ffnn_hidden = ffnn_hidden;
  return s;
}

nn::TrainConfig RunConfig::train_config(std::uint64_t train_seed) const {
  nn::TrainConfig c;
  c.learning_rate = learning_rate;
  c.batch_size = batch_size;
  c.max_epochs = max_epochs;
  c.patience = patience;
  c.clip_norm = clip_norm;
  c.val_fraction = val_fraction;
  c.seed = train_seed;
  c.optimizer = optimizer;
  return c;
}

RandomScenarioOptions RunConfig::scenario_options(int sequence_index) const {
  RandomScenarioOptions o;
  o.seed = synth_seed * 1000003ull + static_cast<std::uint64_t>(sequence_index);
  o.duration_s = synth_duration_s;
  o.frame_rate = frame_rate;
  o.lane_count = synth_lanes;
  o.lane_width = synth_lane_width;
  o.mean_entry_gap_s = synth_entry_gap_s;
  o.change_probability = synth_change_probability;
  o.change_duration_s = synth_change_duration_s;
  o.jitter = synth_jitter;
  o.steepness = synth_steepness;
  return o;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig config;
  for (const KeyValueLine& kv : read_key_values(in)) {
    try {
      config.set(kv.key, kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(kv.line_number) + ": " +
                        e.what());
    }
  }
  config.validate();
  return config;
}

void write_run_config(std::ostream& out, const RunConfig& config) {
  for (const Field& f : fields()) {
    out << f.name << " = " << f.get(config) << "\n";
  }
}

std::string to_text(const RunConfig& config) {
  std::ostringstream out;
  write_run_config(out, config);
  return out.str();
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kSynth:
      return "synth";
    case Stage::kIngest:
      return "ingest";
    case Stage::kLabel:
      return "label";
    case Stage::kFeaturize:
      return "featurize";
    case Stage::kTrain:
      return "train";
    case Stage::kEval:
      return "eval";
    case Stage::kSweep:
      return "sweep";
  }
  return "?";
}

std::vector<std::string> stage_keys(Stage stage) {
  // Synthetic keys only matter to synth; the table stages start at ingest.
  // Sweep reuses the training keys except the single-run ones.
  const auto rank = [](Stage s) {
    switch (s) {
      case Stage::kSynth:
        return 0;
      case Stage::kIngest:
        return 1;
      case Stage::kLabel:
        return 2;
      case Stage::kFeaturize:
        return 3;
      case Stage::kTrain:
        return 4;
      case Stage::kEval:
        return 5;
      case Stage::kSweep:
        return 6;
    }
    return 0;
  };
  std::vector<std::string> keys;
  for (const Field& f : fields()) {
    bool include = false;
    if (stage == Stage::kSynth) {
      include = f.stage == Stage::kSynth || f.name == "frame_rate" ||
                f.name == "unit";
    } else if (stage == Stage::kSweep) {
      include = f.stage != Stage::kSynth && f.name != "n" &&
                f.name != "model" && f.name != "seed";
    } else {
      include = f.stage != Stage::kSynth && f.stage != Stage::kSweep &&
                rank(f.stage) <= rank(stage);
    }
    if (include) keys.push_back(f.name);
  }
  return keys;
}

std::string stage_hash(const RunConfig& config, Stage stage) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto mix = [&](std::string_view text) {
    for (unsigned char ch : text) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  mix(to_string(stage));
  mix("\n");
  for (const std::string& key : stage_keys(stage)) {
    mix(key);
    mix("=");
    mix(config.get(key));
    mix("\n");
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(h));
  return buffer;
}

}  // namespace lcp
