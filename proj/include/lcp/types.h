#ifndef LCP_TYPES_H_
#define LCP_TYPES_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace lcp {

// Intention classes. The numeric values are the class indices used by the
// classifiers and define the tie-break order (Left < Follow < Right).
enum class Maneuver : int { kLeft = 0, kFollow = 1, kRight = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Maneuver, kNumClasses> kAllManeuvers = {
    Maneuver::kLeft, Maneuver::kFollow, Maneuver::kRight};

// Lane-change direction. Left means toward the lane with the lower lane id.
enum class Direction { kLeft, kRight };

inline int class_index(Maneuver m) { return static_cast<int>(m); }

inline Maneuver maneuver_from_index(int index) {
  return static_cast<Maneuver>(index);
}

inline Maneuver to_maneuver(Direction d) {
  return d == Direction::kLeft ? Maneuver::kLeft : Maneuver::kRight;
}

std::string_view to_string(Maneuver m);
std::string_view to_string(Direction d);
std::optional<Maneuver> parse_maneuver(std::string_view text);
std::optional<Direction> parse_direction(std::string_view text);

// One detected or scripted lane change.
struct LaneChangeEvent {
  int vehicle_id = 0;
  int cross_frame = 0;
  int start_frame = 0;
  int end_frame = 0;
  Direction direction = Direction::kLeft;
  // Set when the heading at the cross frame never reached the threshold and
  // the window collapsed to the cross frame itself.
  bool low_confidence = false;

  bool operator==(const LaneChangeEvent&) const = default;
};

}  // namespace lcp

#endif  // LCP_TYPES_H_
