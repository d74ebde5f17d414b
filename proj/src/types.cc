#include "lcp/types.h"

namespace lcp {

std::string_view to_string(Maneuver m) {
  switch (m) {
    case Maneuver::kLeft:
      return "Left";
    case Maneuver::kFollow:
      return "Follow";
    case Maneuver::kRight:
      return "Right";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  return d == Direction::kLeft ? "Left" : "Right";
}

std::optional<Maneuver> parse_maneuver(std::string_view text) {
  if (text == "Left" || text == "left" || text == "L") return Maneuver::kLeft;
  if (text == "Follow" || text == "follow" || text == "F") {
    return Maneuver::kFollow;
  }
  if (text == "Right" || text == "right" || text == "R") {
    return Maneuver::kRight;
  }
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "Left" || text == "left" || text == "L") return Direction::kLeft;
  if (text == "Right" || text == "right" || text == "R") {
    return Direction::kRight;
  }
  return std::nullopt;
}

}  // namespace lcp
