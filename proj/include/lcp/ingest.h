#ifndef LCP_INGEST_H_
#define LCP_INGEST_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lcp {

enum class LengthUnit { kFeet, kMeters };

inline constexpr double kFeetToMeters = 0.3048;

std::optional<LengthUnit> parse_length_unit(std::string_view text);

// One vehicle at one frame, SI units. local_x follows the NGSIM convention:
// measured from the left road edge, so it grows with the lane id and lane 1
// is the leftmost lane. local_y is the front-bumper station along the road.
struct VehicleState {
  int vehicle_id = 0;
  int frame = 0;
  double local_x = 0.0;
  double local_y = 0.0;
  int lane_id = 1;
  double velocity = 0.0;
  double acceleration = 0.0;
  double length = 0.0;
  double width = 0.0;

  bool operator==(const VehicleState&) const = default;
};

// Lateral lane layout of a site. Lane k (1-based) spans
// [lane_boundaries[k-1], lane_boundaries[k]).
struct SiteGeometry {
  std::string site_name = "site";
  std::vector<double> lane_boundaries;

  int lane_count() const {
    return static_cast<int>(lane_boundaries.size()) - 1;
  }
  // Lane containing lateral position x, or nullopt outside the road.
  std::optional<int> lane_at(double x) const;
  double lane_center(int lane_id) const;
  bool has_lane(int lane_id) const {
    return lane_id >= 1 && lane_id <= lane_count();
  }
  // Throws SpecError unless there is at least one lane and the boundaries are
  // strictly increasing.
  void validate() const;

  static SiteGeometry uniform(std::string name, int lane_count,
                              double lane_width);

  bool operator==(const SiteGeometry&) const = default;
};

// Key-value site file:
//   site_name = us101
//   lane_boundaries = 0, 3.7, 7.4, 11.1
SiteGeometry parse_site_config(std::istream& in);
void write_site_config(std::ostream& out, const SiteGeometry& site);

// Frame-indexed trajectories of every vehicle observed at one site. Immutable
// once built; the per-frame index gives O(1) lookup of who is on the road.
class Sequence {
 public:
  struct StateRef {
    std::size_t vehicle_slot;
    std::size_t state_index;
  };

  Sequence() = default;
  // Groups states per vehicle. Each vehicle's states must already be in
  // strictly increasing frame order. An empty frame range is expressed as
  // end_frame = start_frame - 1.
  Sequence(SiteGeometry site, std::vector<std::vector<VehicleState>> tracks,
           int start_frame, int end_frame, double longitudinal_origin);

  const SiteGeometry& site() const { return site_; }
  int start_frame() const { return start_frame_; }
  int end_frame() const { return end_frame_; }
  int frame_count() const { return end_frame_ - start_frame_ + 1; }
  // Station subtracted from local_y when building longitudinal features; kept
  // across splits so train and test share one origin.
  double longitudinal_origin() const { return longitudinal_origin_; }

  const std::vector<int>& vehicle_ids() const { return ids_; }
  std::size_t vehicle_count() const { return ids_.size(); }
  std::size_t state_count() const;

  bool has_vehicle(int vehicle_id) const;
  // Throws LookupError for unknown vehicles.
  std::span<const VehicleState> trajectory(int vehicle_id) const;
  const VehicleState* find(int vehicle_id, int frame) const;
  const VehicleState& at(int vehicle_id, int frame) const;

  std::span<const StateRef> refs_at(int frame) const;
  const VehicleState& state(StateRef ref) const {
    return tracks_[ref.vehicle_slot][ref.state_index];
  }

  // Sub-range of frames [first, last], trajectories cut accordingly.
  Sequence crop(int first, int last) const;

 private:
  SiteGeometry site_;
  std::vector<int> ids_;
  std::vector<std::vector<VehicleState>> tracks_;
  std::map<int, std::size_t> slot_of_;
  std::vector<std::vector<StateRef>> by_frame_;
  int start_frame_ = 0;
  int end_frame_ = -1;
  double longitudinal_origin_ = 0.0;
};

// Reads an NGSIM-style table with a header row. Comma-delimited when the
// header contains a comma, whitespace-delimited otherwise. Required columns:
// Vehicle_ID, Frame_ID, Local_X, Local_Y, v_Vel, v_Acc, Lane_ID, v_Length,
// v_Width (case-insensitive); other columns are ignored.
Sequence parse_trajectory_table(std::istream& in, const SiteGeometry& site,
                                LengthUnit unit = LengthUnit::kFeet);

// Writes the same table format, sorted by vehicle then frame, with values
// printed in shortest round-trip form.
void write_trajectory_table(std::ostream& out, const Sequence& seq,
                            LengthUnit unit = LengthUnit::kMeters);

// Returns {train, test}: test is the first test_minutes of frames, train
// the remainder.
std::pair<Sequence, Sequence> split_sequence(const Sequence& seq,
                                             double test_minutes,
                                             double frame_rate);

enum class Slot : int {
  kEgo = 0,
  kPreceding,
  kPrecedingLeft,
  kPrecedingRight,
  kFollowingLeft,
  kFollowingRight,
  kAlongsideLeft,
  kAlongsideRight,
  kFollowing,  // same-lane rear vehicle
};
inline constexpr std::size_t kSlotCount = 9;

struct SlotInfo {
  bool present = false;
  int vehicle_id = -1;
  double speed = 0.0;
  // Bumper-to-bumper longitudinal gap in meters, clamped to
  // [kMinNeighborGap, gap_cap]. Alongside slots carry |y_i - y_E|.
  double gap = 0.0;

  bool operator==(const SlotInfo&) const = default;
};

inline constexpr double kMinNeighborGap = 0.01;

struct NeighborConfig {
  double gap_cap = 100.0;
};

struct NeighborContext {
  int vehicle_id = 0;
  int frame = 0;
  int lane_id = 1;
  double gap_cap = 100.0;
  bool left_lane_exists = false;
  bool right_lane_exists = false;
  std::array<SlotInfo, kSlotCount> slots{};

  const SlotInfo& operator[](Slot s) const {
    return slots[static_cast<std::size_t>(s)];
  }
  SlotInfo& operator[](Slot s) { return slots[static_cast<std::size_t>(s)]; }
  double ego_speed() const { return (*this)[Slot::kEgo].speed; }

  bool operator==(const NeighborContext&) const = default;
};

// Surrounding-vehicle slots for one (vehicle, frame). Same-lane vehicles are
// ahead/behind by front-bumper order; adjacent-lane vehicles are ahead or
// behind when their longitudinal span clears the ego's, alongside otherwise.
// Nearest candidate wins; ties go to the smaller vehicle id.
NeighborContext neighbors_at(const Sequence& seq, int vehicle_id, int frame,
                             const NeighborConfig& config = {});

}  // namespace lcp

#endif  // LCP_INGEST_H_
