#include "lcp/ingest.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "lcp/errors.h"
#include "lcp/text_util.h"

namespace lcp {

std::optional<LengthUnit> parse_length_unit(std::string_view text) {
  const std::string lower = to_lower(trim(text));
  if (lower == "feet" || lower == "ft") return LengthUnit::kFeet;
  if (lower == "meters" || lower == "m" || lower == "metres") {
    return LengthUnit::kMeters;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// SiteGeometry

std::optional<int> SiteGeometry::lane_at(double x) const {
  if (lane_boundaries.size() < 2) return std::nullopt;
  if (x < lane_boundaries.front() || x >= lane_boundaries.back()) {
    return std::nullopt;
  }
  const auto it =
      std::upper_bound(lane_boundaries.begin(), lane_boundaries.end(), x);
  return static_cast<int>(it - lane_boundaries.begin());
}

double SiteGeometry::lane_center(int lane_id) const {
  if (!has_lane(lane_id)) {
    throw LookupError("lane " + std::to_string(lane_id) + " not in site '" +
                      site_name + "'");
  }
  return 0.5 * (lane_boundaries[lane_id - 1] + lane_boundaries[lane_id]);
}

void SiteGeometry::validate() const {
  if (lane_boundaries.size() < 2) {
    throw SpecError("site '" + site_name + "' needs at least one lane");
  }
  for (std::size_t i = 1; i < lane_boundaries.size(); ++i) {
    if (!(lane_boundaries[i] > lane_boundaries[i - 1])) {
      throw SpecError("site '" + site_name +
                      "': lane boundaries must be strictly increasing");
    }
  }
}

SiteGeometry SiteGeometry::uniform(std::string name, int lane_count,
                                   double lane_width) {
  SiteGeometry site;
  site.site_name = std::move(name);
  for (int k = 0; k <= lane_count; ++k) {
    site.lane_boundaries.push_back(k * lane_width);
  }
  site.validate();
  return site;
}

SiteGeometry parse_site_config(std::istream& in) {
  SiteGeometry site;
  bool have_boundaries = false;
  std::optional<int> declared_count;
  for (const KeyValueLine& kv : read_key_values(in)) {
    if (kv.key == "site_name") {
      site.site_name = kv.value;
    } else if (kv.key == "lane_boundaries") {
      for (std::string_view field : split(kv.value, ',')) {
        const auto value = parse_double(field);
        if (!value) {
          throw ConfigError("site line " + std::to_string(kv.line_number) +
                            ": bad boundary '" + std::string(trim(field)) +
                            "'");
        }
        site.lane_boundaries.push_back(*value);
      }
      have_boundaries = true;
    } else if (kv.key == "lane_count") {
      const auto value = parse_int(kv.value);
      if (!value) throw ConfigError("site: bad lane_count");
      declared_count = static_cast<int>(*value);
    } else {
      throw ConfigError("site line " + std::to_string(kv.line_number) +
                        ": unknown key '" + kv.key + "'");
    }
  }
  if (!have_boundaries) throw SchemaError("site: missing lane_boundaries");
  site.validate();
  if (declared_count && *declared_count != site.lane_count()) {
    throw SpecError("site: lane_count does not match lane_boundaries");
  }
  return site;
}

void write_site_config(std::ostream& out, const SiteGeometry& site) {
  out << "site_name = " << site.site_name << "\n";
  out << "lane_count = " << site.lane_count() << "\n";
  out << "lane_boundaries = ";
  for (std::size_t i = 0; i < site.lane_boundaries.size(); ++i) {
    if (i) out << ", ";
    out << format_double(site.lane_boundaries[i]);
  }
  out << "\n";
}

// ---------------------------------------------------------------------------
// Sequence

Sequence::Sequence(SiteGeometry site,
                   std::vector<std::vector<VehicleState>> tracks,
                   int start_frame, int end_frame, double longitudinal_origin)
    : site_(std::move(site)),
      start_frame_(start_frame),
      end_frame_(end_frame),
      longitudinal_origin_(longitudinal_origin) {
  if (end_frame_ < start_frame_ - 1) {
    throw ArgumentError("sequence frame range is inverted");
  }
  std::erase_if(tracks, [](const auto& t) { return t.empty(); });
  std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) {
    return a.front().vehicle_id < b.front().vehicle_id;
  });
  tracks_ = std::move(tracks);
  by_frame_.resize(static_cast<std::size_t>(frame_count()));
  for (std::size_t slot = 0; slot < tracks_.size(); ++slot) {
    const auto& track = tracks_[slot];
    const int id = track.front().vehicle_id;
    if (!slot_of_.emplace(id, slot).second) {
      throw DataError("vehicle " + std::to_string(id) +
                      " appears in two trajectories");
    }
    ids_.push_back(id);
    for (std::size_t i = 0; i < track.size(); ++i) {
      const VehicleState& s = track[i];
      if (s.vehicle_id != id) {
        throw DataError("trajectory of vehicle " + std::to_string(id) +
                        " contains vehicle " + std::to_string(s.vehicle_id));
      }
      if (i > 0 && s.frame <= track[i - 1].frame) {
        throw DataError("vehicle " + std::to_string(id) +
                        ": frames not strictly increasing at frame " +
                        std::to_string(s.frame));
      }
      if (s.frame < start_frame_ || s.frame > end_frame_) {
        throw DataError("vehicle " + std::to_string(id) + ": frame " +
                        std::to_string(s.frame) + " outside sequence range");
      }
      by_frame_[static_cast<std::size_t>(s.frame - start_frame_)].push_back(
          StateRef{slot, i});
    }
  }
}

std::size_t Sequence::state_count() const {
  std::size_t total = 0;
  for (const auto& t : tracks_) total += t.size();
  return total;
}

bool Sequence::has_vehicle(int vehicle_id) const {
  return slot_of_.contains(vehicle_id);
}

std::span<const VehicleState> Sequence::trajectory(int vehicle_id) const {
  const auto it = slot_of_.find(vehicle_id);
  if (it == slot_of_.end()) {
    throw LookupError("vehicle " + std::to_string(vehicle_id) +
                      " not in sequence");
  }
  return tracks_[it->second];
}

const VehicleState* Sequence::find(int vehicle_id, int frame) const {
  if (frame < start_frame_ || frame > end_frame_) return nullptr;
  const auto it = slot_of_.find(vehicle_id);
  if (it == slot_of_.end()) return nullptr;
  const auto& track = tracks_[it->second];
  // Tracks are usually gap-free, so try direct indexing first.
  const long offset = static_cast<long>(frame) - track.front().frame;
  if (offset >= 0 && offset < static_cast<long>(track.size()) &&
      track[static_cast<std::size_t>(offset)].frame == frame) {
    return &track[static_cast<std::size_t>(offset)];
  }
  const auto pos = std::lower_bound(
      track.begin(), track.end(), frame,
      [](const VehicleState& s, int f) { return s.frame < f; });
  if (pos != track.end() && pos->frame == frame) return &*pos;
  return nullptr;
}

const VehicleState& Sequence::at(int vehicle_id, int frame) const {
  const VehicleState* s = find(vehicle_id, frame);
  if (s == nullptr) {
    throw LookupError("vehicle " + std::to_string(vehicle_id) +
                      " not present at frame " + std::to_string(frame));
  }
  return *s;
}

std::span<const Sequence::StateRef> Sequence::refs_at(int frame) const {
  if (frame < start_frame_ || frame > end_frame_) return {};
  return by_frame_[static_cast<std::size_t>(frame - start_frame_)];
}

Sequence Sequence::crop(int first, int last) const {
  if (last < first - 1) throw ArgumentError("crop range is inverted");
  std::vector<std::vector<VehicleState>> tracks;
  for (const auto& track : tracks_) {
    std::vector<VehicleState> part;
    for (const VehicleState& s : track) {
      if (s.frame >= first && s.frame <= last) part.push_back(s);
    }
    if (!part.empty()) tracks.push_back(std::move(part));
  }
  return Sequence(site_, std::move(tracks), first, last,
                  longitudinal_origin_);
}

// ---------------------------------------------------------------------------
// Table parsing

namespace {

constexpr std::array<const char*, 9> kRequiredColumns = {
    "vehicle_id", "frame_id", "local_x",  "local_y", "v_vel",
    "v_acc",      "lane_id",  "v_length", "v_width"};

enum Column : std::size_t {
  kVehicleId = 0,
  kFrameId,
  kLocalX,
  kLocalY,
  kVel,
  kAcc,
  kLaneId,
  kLength,
  kWidth,
};

std::vector<std::string_view> split_row(std::string_view line, bool comma) {
  if (comma) {
    auto fields = split(line, ',');
    for (auto& f : fields) f = trim(f);
    return fields;
  }
  return split_whitespace(line);
}

}  // namespace

Sequence parse_trajectory_table(std::istream& in, const SiteGeometry& site,
                                LengthUnit unit) {
  site.validate();
  const double scale = unit == LengthUnit::kFeet ? kFeetToMeters : 1.0;

  std::string line;
  int row_number = 0;
  std::string header;
  while (std::getline(in, header)) {
    ++row_number;
    if (!trim(header).empty()) break;
  }
  if (trim(header).empty()) throw SchemaError("trajectory table is empty");
  const bool comma = header.find(',') != std::string::npos;
  const auto names = split_row(header, comma);
  std::array<std::size_t, kRequiredColumns.size()> index{};
  for (std::size_t c = 0; c < kRequiredColumns.size(); ++c) {
    const auto it = std::find_if(names.begin(), names.end(), [&](auto n) {
      return to_lower(n) == kRequiredColumns[c];
    });
    if (it == names.end()) {
      throw SchemaError(std::string("missing required column '") +
                        kRequiredColumns[c] + "'");
    }
    index[c] = static_cast<std::size_t>(it - names.begin());
  }
  const std::size_t needed = *std::max_element(index.begin(), index.end());

  std::map<int, std::vector<VehicleState>> grouped;
  int min_frame = std::numeric_limits<int>::max();
  int max_frame = std::numeric_limits<int>::min();
  double min_y = std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line, comma);
    const std::string where = "line " + std::to_string(row_number);
    if (fields.size() <= needed) {
      throw DataError(where + ": expected at least " +
                      std::to_string(needed + 1) + " fields");
    }
    const auto integer = [&](Column c) {
      const auto v = parse_int(fields[index[c]]);
      if (!v) {
        throw DataError(where + ": bad integer in column " +
                        kRequiredColumns[c]);
      }
      return static_cast<int>(*v);
    };
    const auto real = [&](Column c) {
      const auto v = parse_double(fields[index[c]]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(where + ": bad number in column " +
                        kRequiredColumns[c]);
      }
      return *v;
    };
    VehicleState s;
    s.vehicle_id = integer(kVehicleId);
    s.frame = integer(kFrameId);
    s.local_x = real(kLocalX) * scale;
    s.local_y = real(kLocalY) * scale;
    s.velocity = real(kVel) * scale;
    s.acceleration = real(kAcc) * scale;
    s.lane_id = integer(kLaneId);
    s.length = real(kLength) * scale;
    s.width = real(kWidth) * scale;
    if (!site.has_lane(s.lane_id)) {
      throw DataError(where + ": lane_id " + std::to_string(s.lane_id) +
                      " out of range 1.." + std::to_string(site.lane_count()) +
                      " for vehicle " + std::to_string(s.vehicle_id));
    }
    if (s.velocity < 0.0) {
      throw DataError(where + ": negative velocity for vehicle " +
                      std::to_string(s.vehicle_id));
    }
    auto& track = grouped[s.vehicle_id];
    if (!track.empty() && s.frame <= track.back().frame) {
      throw DataError(where + ": non-monotone frames for vehicle " +
                      std::to_string(s.vehicle_id) + " (frame " +
                      std::to_string(s.frame) + " after " +
                      std::to_string(track.back().frame) + ")");
    }
    min_frame = std::min(min_frame, s.frame);
    max_frame = std::max(max_frame, s.frame);
    min_y = std::min(min_y, s.local_y);
    track.push_back(s);
  }
  if (grouped.empty()) {
    return Sequence(site, {}, 0, -1, 0.0);
  }
  std::vector<std::vector<VehicleState>> tracks;
  tracks.reserve(grouped.size());
  for (auto& [id, track] : grouped) tracks.push_back(std::move(track));
  return Sequence(site, std::move(tracks), min_frame, max_frame, min_y);
}

void write_trajectory_table(std::ostream& out, const Sequence& seq,
                            LengthUnit unit) {
  const double scale = unit == LengthUnit::kFeet ? 1.0 / kFeetToMeters : 1.0;
  out << "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Vel,v_Acc,Lane_ID,v_Length,"
         "v_Width\n";
  for (int id : seq.vehicle_ids()) {
    for (const VehicleState& s : seq.trajectory(id)) {
      out << s.vehicle_id << ',' << s.frame << ','
          << format_double(s.local_x * scale) << ','
          << format_double(s.local_y * scale) << ','
          << format_double(s.velocity * scale) << ','
          << format_double(s.acceleration * scale) << ',' << s.lane_id << ','
          << format_double(s.length * scale) << ','
          << format_double(s.width * scale) << '\n';
    }
  }
}

std::pair<Sequence, Sequence> split_sequence(const Sequence& seq,
                                             double test_minutes,
                                             double frame_rate) {
  if (test_minutes < 0.0 || frame_rate <= 0.0) {
    throw ArgumentError("split: test_minutes must be >= 0 and frame_rate > 0");
  }
  const double frames = test_minutes * 60.0 * frame_rate;
  const long test_frames = std::lround(frames);
  if (test_frames > seq.frame_count()) {
    throw ArgumentError("split: test window of " + std::to_string(test_frames) +
                        " frames exceeds sequence length " +
                        std::to_string(seq.frame_count()));
  }
  const int boundary = seq.start_frame() + static_cast<int>(test_frames);
  Sequence test = seq.crop(seq.start_frame(), boundary - 1);
  Sequence train = seq.crop(boundary, seq.end_frame());
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Neighbor slots

namespace {

double clamp_gap(double gap, double cap) {
  return std::clamp(gap, kMinNeighborGap, cap);
}

struct Candidate {
  double key = std::numeric_limits<double>::infinity();
  const VehicleState* state = nullptr;

  void offer(double k, const VehicleState& s) {
    if (state == nullptr || k < key ||
        (k == key && s.vehicle_id < state->vehicle_id)) {
      key = k;
      state = &s;
    }
  }
};

}  // namespace

NeighborContext neighbors_at(const Sequence& seq, int vehicle_id, int frame,
                             const NeighborConfig& config) {
  const VehicleState& ego = seq.at(vehicle_id, frame);
  const SiteGeometry& site = seq.site();
  NeighborContext ctx;
  ctx.vehicle_id = vehicle_id;
  ctx.frame = frame;
  ctx.lane_id = ego.lane_id;
  ctx.gap_cap = config.gap_cap;
  ctx.left_lane_exists = site.has_lane(ego.lane_id - 1);
  ctx.right_lane_exists = site.has_lane(ego.lane_id + 1);
  for (SlotInfo& slot : ctx.slots) slot.gap = config.gap_cap;
  ctx[Slot::kEgo] = SlotInfo{true, ego.vehicle_id, ego.velocity, 0.0};

  const double ego_front = ego.local_y;
  const double ego_rear = ego.local_y - ego.length;
  Candidate preceding, following;
  Candidate ahead[2], behind[2], alongside[2];  // [0] left, [1] right

  for (const Sequence::StateRef ref : seq.refs_at(frame)) {
    const VehicleState& other = seq.state(ref);
    if (other.vehicle_id == vehicle_id) continue;
    const double front = other.local_y;
    const double rear = other.local_y - other.length;
    if (other.lane_id == ego.lane_id) {
      if (front > ego_front) {
        preceding.offer(front - ego_front, other);
      } else if (front < ego_front) {
        following.offer(ego_front - front, other);
      }
      continue;
    }
    int side;
    if (other.lane_id == ego.lane_id - 1) {
      side = 0;
    } else if (other.lane_id == ego.lane_id + 1) {
      side = 1;
    } else {
      continue;
    }
    if (rear > ego_front) {
      ahead[side].offer(rear - ego_front, other);
    } else if (front < ego_rear) {
      behind[side].offer(ego_rear - front, other);
    } else {
      alongside[side].offer(std::abs(front - ego_front), other);
    }
  }

  const auto fill = [&](Slot slot, const Candidate& c, double gap) {
    if (c.state == nullptr) return;
    ctx[slot] = SlotInfo{true, c.state->vehicle_id, c.state->velocity, gap};
  };
  if (preceding.state) {
    fill(Slot::kPreceding, preceding,
         clamp_gap(preceding.state->local_y - preceding.state->length -
                       ego_front,
                   config.gap_cap));
  }
  if (following.state) {
    fill(Slot::kFollowing, following,
         clamp_gap(ego_rear - following.state->local_y, config.gap_cap));
  }
  constexpr Slot kAhead[2] = {Slot::kPrecedingLeft, Slot::kPrecedingRight};
  constexpr Slot kBehind[2] = {Slot::kFollowingLeft, Slot::kFollowingRight};
  constexpr Slot kAlongside[2] = {Slot::kAlongsideLeft, Slot::kAlongsideRight};
  for (int side = 0; side < 2; ++side) {
    fill(kAhead[side], ahead[side], clamp_gap(ahead[side].key, config.gap_cap));
    fill(kBehind[side], behind[side],
         clamp_gap(behind[side].key, config.gap_cap));
    fill(kAlongside[side], alongside[side],
         std::min(alongside[side].key, config.gap_cap));
  }
  return ctx;
}

}  // namespace lcp
