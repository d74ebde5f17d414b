#ifndef LCP_SEGMENT_H_
#define LCP_SEGMENT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "lcp/types.h"

namespace lcp {

struct StepLabel {
  int vehicle_id = 0;
  int frame = 0;
  Maneuver label = Maneuver::kFollow;

  bool operator==(const StepLabel&) const = default;
};

// Feature vector of one (vehicle, frame).
struct FeatureRow {
  int vehicle_id = 0;
  int frame = 0;
  std::vector<double> values;
};

// Rows sorted by (vehicle_id, frame).
using FeatureTable = std::vector<FeatureRow>;

// n consecutive steps of one vehicle, labeled by the intention at the last
// step. Features are stored step-major: features[step * dim + k].
struct Segment {
  int vehicle_id = 0;
  int end_frame = 0;
  int steps = 0;
  int dim = 0;
  Maneuver label = Maneuver::kFollow;
  std::vector<double> features;

  int first_frame() const { return end_frame - steps + 1; }
  std::span<const double> step(int t) const {
    return std::span<const double>(features).subspan(
        static_cast<std::size_t>(t) * static_cast<std::size_t>(dim),
        static_cast<std::size_t>(dim));
  }

  bool operator==(const Segment&) const = default;
};

}  // namespace lcp

#endif  // LCP_SEGMENT_H_
