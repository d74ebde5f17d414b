#include "lcp/synthetic.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <tuple>
#include <ostream>

#include "lcp/errors.h"
#include "lcp/rng.h"
#include "lcp/text_util.h"

namespace lcp {

namespace {

constexpr double kFrameTolerance = 1e-9;
constexpr double kBoundaryNudge = 1e-6;

int change_frames(const ScriptedChange& c, double frame_rate) {
  return static_cast<int>(std::lround(c.duration_s * frame_rate));
}

int target_lane(int lane, Direction d) {
  return d == Direction::kLeft ? lane - 1 : lane + 1;
}

}  // namespace

double lateral_progress(double u, double steepness) {
  return 0.5 + 0.5 * std::tanh(steepness * (u - 0.5)) /
                   std::tanh(0.5 * steepness);
}

double lateral_progress_inverse(double p, double steepness) {
  return 0.5 + std::atanh((2.0 * p - 1.0) * std::tanh(0.5 * steepness)) /
                   steepness;
}

int ScenarioSpec::frame_count() const {
  return static_cast<int>(std::lround(duration_s * frame_rate));
}

SiteGeometry ScenarioSpec::site() const {
  return SiteGeometry::uniform(site_name, lane_count, lane_width);
}

void ScenarioSpec::validate() const {
  if (duration_s <= 0.0 || frame_rate <= 0.0) {
    throw SpecError("scenario: duration_s and frame_rate must be positive");
  }
  if (lane_count < 1 || lane_width <= 0.0) {
    throw SpecError("scenario: need lane_count >= 1 and lane_width > 0");
  }
  if (jitter < 0.0 || jitter >= 0.5 * lane_width) {
    throw SpecError("scenario: jitter must be in [0, lane_width / 2)");
  }
  if (steepness <= 0.0) throw SpecError("scenario: steepness must be > 0");
  std::map<int, int> seen;
  for (const VehicleScript& v : vehicles) {
    const std::string who = "vehicle " + std::to_string(v.vehicle_id);
    if (!seen.emplace(v.vehicle_id, 0).second) {
      throw SpecError("scenario: duplicate " + who);
    }
    if (v.exit_frame < v.entry_frame || v.entry_frame < 0) {
      throw SpecError("scenario: " + who + " has an empty lifetime");
    }
    if (v.lane < 1 || v.lane > lane_count) {
      throw SpecError("scenario: " + who + " starts outside the road");
    }
    if (v.speed < 0.0 || v.length <= 0.0 || v.width <= 0.0) {
      throw SpecError("scenario: " + who + " has invalid kinematics");
    }
    int lane = v.lane;
    int previous_end = v.entry_frame - 1;
    for (const ScriptedChange& c : v.changes) {
      const int frames = change_frames(c, frame_rate);
      if (frames < 2) {
        throw SpecError("scenario: " + who + " change shorter than 2 frames");
      }
      if (c.start_frame <= previous_end) {
        throw SpecError("scenario: " + who + " has overlapping changes");
      }
      if (c.start_frame < v.entry_frame ||
          c.start_frame + frames > std::min(v.exit_frame, frame_count() - 1)) {
        throw SpecError("scenario: " + who +
                        " change does not fit inside its lifetime");
      }
      lane = target_lane(lane, c.direction);
      if (lane < 1 || lane > lane_count) {
        throw SpecError("scenario: " + who + " changes off the road");
      }
      previous_end = c.start_frame + frames;
    }
    for (std::size_t i = 1; i < v.accel_phases.size(); ++i) {
      if (v.accel_phases[i].start_frame <= v.accel_phases[i - 1].start_frame) {
        throw SpecError("scenario: " + who + " accel phases out of order");
      }
    }
  }
}

Scenario generate(const ScenarioSpec& spec) {
  spec.validate();
  const SiteGeometry site = spec.site();
  const int last_frame = spec.frame_count() - 1;
  const double dt = 1.0 / spec.frame_rate;

  std::vector<std::vector<VehicleState>> tracks;
  std::vector<LaneChangeEvent> truth;
  double min_y = std::numeric_limits<double>::infinity();

  for (const VehicleScript& v : spec.vehicles) {
    const int first = v.entry_frame;
    const int last = std::min(v.exit_frame, last_frame);
    if (first > last) continue;
    Rng rng(spec.seed * 0x9E3779B97F4A7C15ull +
            static_cast<std::uint64_t>(v.vehicle_id));

    // Lateral plan: lane held before each change, profile during it.
    struct Transition {
      int start;
      int end;
      int from;
      int to;
      double boundary;
      int cross_frame;
    };
    std::vector<Transition> plan;
    int lane = v.lane;
    for (const ScriptedChange& c : v.changes) {
      Transition t;
      t.start = c.start_frame;
      t.end = c.start_frame + change_frames(c, spec.frame_rate);
      t.from = lane;
      t.to = target_lane(lane, c.direction);
      t.boundary = site.lane_boundaries[std::max(t.from, t.to) - 1];
      const double c_from = site.lane_center(t.from);
      const double c_to = site.lane_center(t.to);
      const double u = lateral_progress_inverse(
          (t.boundary - c_from) / (c_to - c_from), spec.steepness);
      const double t_cross = t.start + u * (t.end - t.start);
      t.cross_frame = static_cast<int>(std::ceil(t_cross - kFrameTolerance));
      plan.push_back(t);
      lane = t.to;
    }

    std::vector<VehicleState> track;
    track.reserve(static_cast<std::size_t>(last - first + 1));
    double y = v.initial_y;
    double speed = v.speed;
    std::size_t phase = 0;
    double accel = 0.0;
    for (int f = first; f <= last; ++f) {
      while (phase < v.accel_phases.size() &&
             v.accel_phases[phase].start_frame <= f) {
        accel = v.accel_phases[phase].acceleration;
        ++phase;
      }
      int current = v.lane;
      double x = 0.0;
      bool keeping = true;
      for (const Transition& t : plan) {
        if (f < t.start) break;
        if (f <= t.end) {
          const double u = static_cast<double>(f - t.start) / (t.end - t.start);
          const double c_from = site.lane_center(t.from);
          const double c_to = site.lane_center(t.to);
          x = c_from + (c_to - c_from) * lateral_progress(u, spec.steepness);
          // Keep the rendered samples on the side the closed-form crossing
          // time implies; only samples within rounding of the boundary move.
          const bool rightward = c_to > c_from;
          const bool crossed = rightward ? x >= t.boundary : x < t.boundary;
          const double past = rightward ? kBoundaryNudge : -kBoundaryNudge;
          if (f >= t.cross_frame && !crossed) {
            x = t.boundary + past;
          } else if (f < t.cross_frame && crossed) {
            x = t.boundary - past;
          }
          keeping = false;
          current = t.from;
          break;
        }
        current = t.to;
      }
      if (keeping) {
        x = site.lane_center(current);
        if (spec.jitter > 0.0) x += rng.uniform(-spec.jitter, spec.jitter);
      }
      VehicleState s;
      s.vehicle_id = v.vehicle_id;
      s.frame = f;
      s.local_x = x;
      s.local_y = y;
      s.lane_id = site.lane_at(x).value_or(current);
      s.velocity = speed;
      s.acceleration = speed > 0.0 || accel > 0.0 ? accel : 0.0;
      s.length = v.length;
      s.width = v.width;
      track.push_back(s);
      min_y = std::min(min_y, y);

      const double next_speed = std::max(0.0, speed + accel * dt);
      y += 0.5 * (speed + next_speed) * dt;
      speed = next_speed;
    }
    tracks.push_back(std::move(track));

    for (std::size_t i = 0; i < plan.size(); ++i) {
      const Transition& t = plan[i];
      if (t.end > last) continue;
      LaneChangeEvent e;
      e.vehicle_id = v.vehicle_id;
      e.cross_frame = t.cross_frame;
      e.start_frame = t.start;
      e.end_frame = t.end;
      e.direction = v.changes[i].direction;
      truth.push_back(e);
    }
  }
  if (!std::isfinite(min_y)) min_y = 0.0;
  std::sort(truth.begin(), truth.end(), [](const auto& a, const auto& b) {
    return std::tie(a.vehicle_id, a.cross_frame) <
           std::tie(b.vehicle_id, b.cross_frame);
  });
  return Scenario{Sequence(site, std::move(tracks), 0, last_frame, min_y),
                  std::move(truth)};
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::map<std::string, std::string> parse_fields(const KeyValueLine& kv) {
  std::map<std::string, std::string> fields;
  for (std::string_view token : split_whitespace(kv.value)) {
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("scenario line " + std::to_string(kv.line_number) +
                        ": expected name=value, got '" + std::string(token) +
                        "'");
    }
    fields.emplace(std::string(token.substr(0, eq)),
                   std::string(token.substr(eq + 1)));
  }
  return fields;
}

class FieldReader {
 public:
  FieldReader(const KeyValueLine& kv) : kv_(kv), fields_(parse_fields(kv)) {}

  double real(const std::string& name, std::optional<double> fallback = {}) {
    const auto it = fields_.find(name);
    if (it == fields_.end()) {
      if (fallback) return *fallback;
      fail("missing field '" + name + "'");
    }
    const auto v = parse_double(it->second);
    if (!v) fail("bad number for '" + name + "'");
    used_.push_back(name);
    return *v;
  }

  int integer(const std::string& name, std::optional<int> fallback = {}) {
    const auto it = fields_.find(name);
    if (it == fields_.end()) {
      if (fallback) return *fallback;
      fail("missing field '" + name + "'");
    }
    const auto v = parse_int(it->second);
    if (!v) fail("bad integer for '" + name + "'");
    used_.push_back(name);
    return static_cast<int>(*v);
  }

  std::string text(const std::string& name) {
    const auto it = fields_.find(name);
    if (it == fields_.end()) fail("missing field '" + name + "'");
    used_.push_back(name);
    return it->second;
  }

  void finish() const {
    for (const auto& [name, value] : fields_) {
      if (std::find(used_.begin(), used_.end(), name) == used_.end()) {
        fail("unknown field '" + name + "'");
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("scenario line " + std::to_string(kv_.line_number) +
                      ": " + what);
  }

  const KeyValueLine& kv_;
  std::map<std::string, std::string> fields_;
  std::vector<std::string> used_;
};

}  // namespace

ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  std::map<int, std::size_t> index;
  const auto vehicle = [&](int id, int line) -> VehicleScript& {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw ConfigError("scenario line " + std::to_string(line) +
                        ": vehicle " + std::to_string(id) +
                        " used before it is declared");
    }
    return spec.vehicles[it->second];
  };
  for (const KeyValueLine& kv : read_key_values(in)) {
    const auto number = [&]() {
      const auto v = parse_double(kv.value);
      if (!v) {
        throw ConfigError("scenario line " + std::to_string(kv.line_number) +
                          ": bad number for '" + kv.key + "'");
      }
      return *v;
    };
    if (kv.key == "seed") {
      const auto v = parse_int(kv.value);
      if (!v || *v < 0) throw ConfigError("scenario: bad seed");
      spec.seed = static_cast<std::uint64_t>(*v);
    } else if (kv.key == "duration_s") {
      spec.duration_s = number();
    } else if (kv.key == "frame_rate") {
      spec.frame_rate = number();
    } else if (kv.key == "lane_count") {
      spec.lane_count = static_cast<int>(number());
    } else if (kv.key == "lane_width") {
      spec.lane_width = number();
    } else if (kv.key == "jitter") {
      spec.jitter = number();
    } else if (kv.key == "steepness") {
      spec.steepness = number();
    } else if (kv.key == "site_name") {
      spec.site_name = kv.value;
    } else if (kv.key == "vehicle") {
      FieldReader r(kv);
      VehicleScript v;
      v.vehicle_id = r.integer("id");
      v.entry_frame = r.integer("entry", 0);
      v.exit_frame = r.integer("exit");
      v.lane = r.integer("lane");
      v.initial_y = r.real("y", 0.0);
      v.speed = r.real("speed");
      v.length = r.real("length", 4.5);
      v.width = r.real("width", 1.8);
      r.finish();
      if (index.contains(v.vehicle_id)) {
        throw ConfigError("scenario: duplicate vehicle " +
                          std::to_string(v.vehicle_id));
      }
      index[v.vehicle_id] = spec.vehicles.size();
      spec.vehicles.push_back(v);
    } else if (kv.key == "change") {
      FieldReader r(kv);
      VehicleScript& v = vehicle(r.integer("vehicle"), kv.line_number);
      ScriptedChange c;
      c.start_frame = r.integer("start");
      c.duration_s = r.real("duration", 4.0);
      const auto d = parse_direction(r.text("direction"));
      if (!d) throw ConfigError("scenario: bad change direction");
      c.direction = *d;
      r.finish();
      v.changes.push_back(c);
    } else if (kv.key == "accel") {
      FieldReader r(kv);
      VehicleScript& v = vehicle(r.integer("vehicle"), kv.line_number);
      AccelPhase p;
      p.start_frame = r.integer("start");
      p.acceleration = r.real("value");
      r.finish();
      v.accel_phases.push_back(p);
    } else {
      throw ConfigError("scenario line " + std::to_string(kv.line_number) +
                        ": unknown key '" + kv.key + "'");
    }
  }
  for (VehicleScript& v : spec.vehicles) {
    std::sort(v.changes.begin(), v.changes.end(),
              [](const auto& a, const auto& b) {
                return a.start_frame < b.start_frame;
              });
  }
  spec.validate();
  return spec;
}

void write_scenario(std::ostream& out, const ScenarioSpec& spec) {
  out << "seed = " << spec.seed << "\n"
      << "duration_s = " << format_double(spec.duration_s) << "\n"
      << "frame_rate = " << format_double(spec.frame_rate) << "\n"
      << "lane_count = " << spec.lane_count << "\n"
      << "lane_width = " << format_double(spec.lane_width) << "\n"
      << "jitter = " << format_double(spec.jitter) << "\n"
      << "steepness = " << format_double(spec.steepness) << "\n"
      << "site_name = " << spec.site_name << "\n";
  for (const VehicleScript& v : spec.vehicles) {
    out << "vehicle = id=" << v.vehicle_id << " entry=" << v.entry_frame
        << " exit=" << v.exit_frame << " lane=" << v.lane
        << " y=" << format_double(v.initial_y)
        << " speed=" << format_double(v.speed)
        << " length=" << format_double(v.length)
        << " width=" << format_double(v.width) << "\n";
    for (const AccelPhase& p : v.accel_phases) {
      out << "accel = vehicle=" << v.vehicle_id << " start=" << p.start_frame
          << " value=" << format_double(p.acceleration) << "\n";
    }
    for (const ScriptedChange& c : v.changes) {
      out << "change = vehicle=" << v.vehicle_id << " start=" << c.start_frame
          << " duration=" << format_double(c.duration_s)
          << " direction=" << to_string(c.direction) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Random scenes

ScenarioSpec random_scenario(const RandomScenarioOptions& o) {
  ScenarioSpec spec;
  spec.seed = o.seed;
  spec.duration_s = o.duration_s;
  spec.frame_rate = o.frame_rate;
  spec.lane_count = o.lane_count;
  spec.lane_width = o.lane_width;
  spec.jitter = o.jitter;
  spec.steepness = o.steepness;
  spec.site_name = "synthetic";

  Rng rng(o.seed ^ 0xA5A5A5A55A5A5A5Aull);
  const int total = spec.frame_count();
  const int margin = static_cast<int>(std::lround(o.margin_s * o.frame_rate));
  const int change_len =
      static_cast<int>(std::lround(o.change_duration_s * o.frame_rate));
  int entry = 0;
  int id = 1;
  while (entry < total) {
    VehicleScript v;
    v.vehicle_id = id++;
    v.entry_frame = entry;
    v.lane = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(o.lane_count)));
    v.speed = rng.uniform(o.min_speed, o.max_speed);
    v.length = rng.uniform(4.0, 5.5);
    v.width = rng.uniform(1.7, 2.1);
    const int life =
        static_cast<int>(std::floor(o.road_length / v.speed * o.frame_rate));
    v.exit_frame = std::min(entry + life, total - 1);

    if (rng.uniform() < o.accel_probability) {
      const int start = entry + static_cast<int>(rng.index(
                                    static_cast<std::size_t>(std::max(1, life / 2))));
      v.accel_phases.push_back({start, rng.uniform(-0.8, 0.8)});
      v.accel_phases.push_back(
          {start + static_cast<int>(std::lround(3.0 * o.frame_rate)), 0.0});
    }

    const int earliest = v.entry_frame + margin;
    const int latest = v.exit_frame - margin - change_len;
    if (latest >= earliest && rng.uniform() < o.change_probability) {
      std::vector<Direction> options;
      if (v.lane > 1) options.push_back(Direction::kLeft);
      if (v.lane < o.lane_count) options.push_back(Direction::kRight);
      if (!options.empty()) {
        ScriptedChange c;
        c.start_frame =
            earliest + static_cast<int>(rng.index(
                           static_cast<std::size_t>(latest - earliest + 1)));
        c.duration_s = o.change_duration_s;
        c.direction = options[rng.index(options.size())];
        v.changes.push_back(c);
      }
    }
    spec.vehicles.push_back(std::move(v));
    const double gap = o.mean_entry_gap_s * rng.uniform(0.5, 1.5);
    entry += std::max(1, static_cast<int>(std::lround(gap * o.frame_rate)));
  }
  spec.validate();
  return spec;
}

}  // namespace lcp
