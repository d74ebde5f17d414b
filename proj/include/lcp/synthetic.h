#ifndef LCP_SYNTHETIC_H_
#define LCP_SYNTHETIC_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lcp/ingest.h"
#include "lcp/types.h"

namespace lcp {

struct ScriptedChange {
  int start_frame = 0;
  double duration_s = 4.0;
  Direction direction = Direction::kLeft;
};

// Acceleration held from start_frame until the next phase begins.
struct AccelPhase {
  int start_frame = 0;
  double acceleration = 0.0;
};

struct VehicleScript {
  int vehicle_id = 0;
  int entry_frame = 0;
  // Last frame on the road (inclusive); clipped to the scenario duration.
  int exit_frame = 0;
  int lane = 1;
  double initial_y = 0.0;
  double speed = 25.0;
  double length = 4.5;
  double width = 1.8;
  std::vector<AccelPhase> accel_phases;
  std::vector<ScriptedChange> changes;
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  double duration_s = 60.0;
  double frame_rate = 10.0;
  int lane_count = 4;
  double lane_width = 3.7;
  // Half-width of the uniform lateral noise added while lane keeping.
  double jitter = 0.05;
  // Steepness of the tanh lateral profile used for scripted changes.
  double steepness = 6.0;
  std::string site_name = "synthetic";
  std::vector<VehicleScript> vehicles;

  int frame_count() const;
  SiteGeometry site() const;
  // Throws SpecError on overlapping changes, lanes outside the road, or
  // changes that do not fit inside the vehicle's lifetime.
  void validate() const;
};

struct Scenario {
  Sequence sequence;
  std::vector<LaneChangeEvent> ground_truth;
};

// Normalized lateral progress in [0, 1] at fraction u of a change:
// 0.5 + 0.5 * tanh(k (u - 0.5)) / tanh(k / 2).
double lateral_progress(double u, double steepness);
// Inverse of lateral_progress for p in (0, 1).
double lateral_progress_inverse(double p, double steepness);

// Renders the scripted scene. Ground-truth cross frames are solved in closed
// form from the lateral profile (a sample exactly on the boundary counts as
// crossed). Samples that rounding puts on the wrong side of the boundary are
// moved 1e-6 m so the rendered crossing frame matches the closed form.
Scenario generate(const ScenarioSpec& spec);

// Text config, "key = value" per line; see write_scenario for the layout.
ScenarioSpec parse_scenario(std::istream& in);
void write_scenario(std::ostream& out, const ScenarioSpec& spec);

struct RandomScenarioOptions {
  std::uint64_t seed = 1;
  double duration_s = 600.0;
  double frame_rate = 10.0;
  int lane_count = 4;
  double lane_width = 3.7;
  double road_length = 400.0;
  // Mean time between vehicle entries, all lanes combined.
  double mean_entry_gap_s = 2.0;
  double min_speed = 18.0;
  double max_speed = 30.0;
  double change_probability = 0.6;
  double change_duration_s = 4.0;
  double jitter = 0.05;
  double steepness = 6.0;
  // Minimum lane-keeping time before and after a change.
  double margin_s = 3.0;
  double accel_probability = 0.3;
};

// A stream of vehicles entering at station 0 and leaving at road_length,
// each making at most one lane change.
ScenarioSpec random_scenario(const RandomScenarioOptions& options);

}  // namespace lcp

#endif  // LCP_SYNTHETIC_H_
