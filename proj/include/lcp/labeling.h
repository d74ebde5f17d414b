#ifndef LCP_LABELING_H_
#define LCP_LABELING_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "lcp/ingest.h"
#include "lcp/segment.h"
#include "lcp/types.h"

namespace lcp {

struct LabelingConfig {
  // Half-width of the inspection window around a cross point, seconds.
  double delta_t = 2.0;
  // Heading threshold in degrees that bounds a maneuver.
  double theta_bound = 2.0;
  // Moving-average window applied to the heading, seconds.
  double heading_smooth_window = 0.5;
  // Segment length in steps.
  int n = 9;
  double frame_rate = 10.0;

  // Throws ArgumentError unless delta_t, heading_smooth_window, frame_rate
  // are positive, theta_bound >= 0 and n >= 2.
  void validate() const;
};

struct CrossPoint {
  int vehicle_id = 0;
  int cross_frame = 0;
  Direction direction = Direction::kLeft;

  bool operator==(const CrossPoint&) const = default;
};

// Frames where a vehicle's lateral centroid moves to a different lane (by
// site geometry) between two consecutive frames. Moving to a lower lane id is
// Left. Sorted by (vehicle, frame).
std::vector<CrossPoint> find_cross_points(const Sequence& seq);

// Heading in degrees for every state of the vehicle's trajectory, positive
// when moving left (toward lower lane ids). Centered differences inside each
// gap-free run, one-sided at run ends, then a centered moving average over
// heading_smooth_window. Throws ArgumentError for trajectories shorter than
// three frames.
std::vector<double> heading_series(const Sequence& seq, int vehicle_id,
                                   const LabelingConfig& config);

// Bounds the maneuver around a cross point: the maximal run of frames with
// |heading| >= theta_bound that contains the cross frame, limited to
// [cross - delta_t, cross + delta_t] and to gap-free frames. A cross frame
// below the threshold yields start = end = cross with low_confidence set.
LaneChangeEvent maneuver_window(const Sequence& seq, const CrossPoint& cross,
                                const LabelingConfig& config);
// Same, reusing a heading series computed by heading_series.
LaneChangeEvent maneuver_window(std::span<const VehicleState> trajectory,
                                std::span<const double> heading,
                                const CrossPoint& cross,
                                const LabelingConfig& config);

// One label per (vehicle, frame) of the sequence, sorted by (vehicle, frame).
// Frames inside an event window take its direction; a frame claimed by
// several windows goes to the nearest cross frame, ties to the earlier one.
std::vector<StepLabel> label_steps(const Sequence& seq,
                                   std::span<const LaneChangeEvent> events);

// Sliding windows of n gap-free frames per vehicle (stride 1), labeled by the
// last step. Throws ArgumentError if n < 2 or a labeled frame has no feature
// row.
std::vector<Segment> package_segments(std::span<const StepLabel> labels,
                                      const FeatureTable& features, int n);

// Draws the same number of segments from each class pool without
// replacement, then shuffles. N is the smallest pool size, optionally capped
// by max_per_class (0 = no cap). Throws BalanceError naming an empty class.
std::vector<Segment> balance_classes(std::span<const Segment> segments,
                                     std::uint64_t seed,
                                     std::size_t max_per_class = 0);

// Everything the labeling stage produces for one sequence.
struct LabeledSequence {
  std::vector<LaneChangeEvent> events;
  std::vector<StepLabel> labels;
  // Heading per vehicle, aligned with the vehicle's trajectory.
  std::map<int, std::vector<double>> headings;
};

LabeledSequence label_sequence(const Sequence& seq,
                               const LabelingConfig& config);

}  // namespace lcp

#endif  // LCP_LABELING_H_
