#include "lcp/labeling.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>

#include "lcp/errors.h"
#include "lcp/rng.h"

namespace lcp {

void LabelingConfig::validate() const {
  if (!(delta_t > 0.0) || !(heading_smooth_window > 0.0) ||
      !(frame_rate > 0.0)) {
    throw ArgumentError(
        "labeling: delta_t, heading_smooth_window and frame_rate must be > 0");
  }
  if (!(theta_bound >= 0.0)) {
    throw ArgumentError("labeling: theta_bound must be >= 0");
  }
  if (n < 2) throw ArgumentError("labeling: n must be >= 2");
}

namespace {

// Lane index including off-road positions (0 left of the road,
// lane_count + 1 right of it).
int side_of(const SiteGeometry& site, double x) {
  if (const auto lane = site.lane_at(x)) return *lane;
  return x < site.lane_boundaries.front() ? 0 : site.lane_count() + 1;
}

double to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace

std::vector<CrossPoint> find_cross_points(const Sequence& seq) {
  std::vector<CrossPoint> out;
  const SiteGeometry& site = seq.site();
  for (int id : seq.vehicle_ids()) {
    const auto track = seq.trajectory(id);
    for (std::size_t i = 1; i < track.size(); ++i) {
      if (track[i].frame != track[i - 1].frame + 1) continue;
      const int before = side_of(site, track[i - 1].local_x);
      const int after = side_of(site, track[i].local_x);
      if (before == after) continue;
      out.push_back(CrossPoint{id, track[i].frame,
                               after < before ? Direction::kLeft
                                              : Direction::kRight});
    }
  }
  return out;
}

std::vector<double> heading_series(const Sequence& seq, int vehicle_id,
                                   const LabelingConfig& config) {
  config.validate();
  const auto track = seq.trajectory(vehicle_id);
  if (track.size() < 3) {
    throw ArgumentError("heading: vehicle " + std::to_string(vehicle_id) +
                        " has fewer than 3 frames");
  }
  const std::size_t count = track.size();
  std::vector<double> raw(count, 0.0);
  std::vector<double> smoothed(count, 0.0);
  const int window = std::max(
      1, static_cast<int>(std::lround(config.heading_smooth_window *
                                      config.frame_rate)));
  const std::size_t half = static_cast<std::size_t>(window / 2);

  std::size_t run_begin = 0;
  while (run_begin < count) {
    std::size_t run_end = run_begin + 1;
    while (run_end < count && track[run_end].frame == track[run_end - 1].frame + 1) {
      ++run_end;
    }
    // Lateral axis is flipped so that leftward motion is positive.
    const auto heading_between = [&](std::size_t a, std::size_t b) {
      const double lateral = -(track[b].local_x - track[a].local_x);
      const double longitudinal = track[b].local_y - track[a].local_y;
      if (lateral == 0.0 && longitudinal == 0.0) return 0.0;
      return to_degrees(std::atan2(lateral, longitudinal));
    };
    if (run_end - run_begin >= 2) {
      for (std::size_t i = run_begin; i < run_end; ++i) {
        const std::size_t a = i == run_begin ? i : i - 1;
        const std::size_t b = i + 1 == run_end ? i : i + 1;
        raw[i] = heading_between(a, b);
      }
    }
    for (std::size_t i = run_begin; i < run_end; ++i) {
      const std::size_t lo = std::max(run_begin, i >= half ? i - half : 0);
      const std::size_t hi = std::min(run_end - 1, i + half);
      double sum = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) sum += raw[j];
      smoothed[i] = sum / static_cast<double>(hi - lo + 1);
    }
    run_begin = run_end;
  }
  return smoothed;
}

LaneChangeEvent maneuver_window(std::span<const VehicleState> trajectory,
                                std::span<const double> heading,
                                const CrossPoint& cross,
                                const LabelingConfig& config) {
  config.validate();
  if (heading.size() != trajectory.size()) {
    throw ArgumentError("maneuver_window: heading/trajectory size mismatch");
  }
  const auto pos = std::lower_bound(
      trajectory.begin(), trajectory.end(), cross.cross_frame,
      [](const VehicleState& s, int f) { return s.frame < f; });
  if (pos == trajectory.end() || pos->frame != cross.cross_frame) {
    throw ArgumentError("maneuver_window: cross frame " +
                        std::to_string(cross.cross_frame) +
                        " outside the trajectory of vehicle " +
                        std::to_string(cross.vehicle_id));
  }
  const std::size_t center = static_cast<std::size_t>(pos - trajectory.begin());
  const int reach =
      static_cast<int>(std::lround(config.delta_t * config.frame_rate));
  const auto above = [&](std::size_t i) {
    return std::abs(heading[i]) >= config.theta_bound;
  };

  LaneChangeEvent e;
  e.vehicle_id = cross.vehicle_id;
  e.cross_frame = cross.cross_frame;
  e.direction = cross.direction;
  e.start_frame = cross.cross_frame;
  e.end_frame = cross.cross_frame;
  if (!above(center)) {
    e.low_confidence = true;
    return e;
  }
  std::size_t lo = center;
  while (lo > 0 && trajectory[lo - 1].frame == trajectory[lo].frame - 1 &&
         cross.cross_frame - trajectory[lo - 1].frame <= reach &&
         above(lo - 1)) {
    --lo;
  }
  std::size_t hi = center;
  while (hi + 1 < trajectory.size() &&
         trajectory[hi + 1].frame == trajectory[hi].frame + 1 &&
         trajectory[hi + 1].frame - cross.cross_frame <= reach &&
         above(hi + 1)) {
    ++hi;
  }
  e.start_frame = trajectory[lo].frame;
  e.end_frame = trajectory[hi].frame;
  return e;
}

LaneChangeEvent maneuver_window(const Sequence& seq, const CrossPoint& cross,
                                const LabelingConfig& config) {
  if (cross.cross_frame < seq.start_frame() ||
      cross.cross_frame > seq.end_frame()) {
    throw ArgumentError("maneuver_window: cross frame " +
                        std::to_string(cross.cross_frame) +
                        " outside sequence bounds");
  }
  const auto track = seq.trajectory(cross.vehicle_id);
  const std::vector<double> heading =
      heading_series(seq, cross.vehicle_id, config);
  return maneuver_window(track, heading, cross, config);
}

std::vector<StepLabel> label_steps(const Sequence& seq,
                                   std::span<const LaneChangeEvent> events) {
  std::map<int, std::vector<const LaneChangeEvent*>> by_vehicle;
  for (const LaneChangeEvent& e : events) by_vehicle[e.vehicle_id].push_back(&e);
  for (auto& [id, list] : by_vehicle) {
    std::sort(list.begin(), list.end(), [](const auto* a, const auto* b) {
      return a->cross_frame < b->cross_frame;
    });
  }

  std::vector<StepLabel> labels;
  labels.reserve(seq.state_count());
  for (int id : seq.vehicle_ids()) {
    const auto it = by_vehicle.find(id);
    for (const VehicleState& s : seq.trajectory(id)) {
      StepLabel label{id, s.frame, Maneuver::kFollow};
      if (it != by_vehicle.end()) {
        const LaneChangeEvent* owner = nullptr;
        int best = 0;
        for (const LaneChangeEvent* e : it->second) {
          if (s.frame < e->start_frame || s.frame > e->end_frame) continue;
          const int distance = std::abs(s.frame - e->cross_frame);
          // Events are in cross-frame order, so strict < keeps the earlier
          // event on ties.
          if (owner == nullptr || distance < best) {
            owner = e;
            best = distance;
          }
        }
        if (owner != nullptr) label.label = to_maneuver(owner->direction);
      }
      labels.push_back(label);
    }
  }
  return labels;
}

std::vector<Segment> package_segments(std::span<const StepLabel> labels,
                                      const FeatureTable& features, int n) {
  if (n < 2) throw ArgumentError("package_segments: n must be >= 2");
  std::map<std::pair<int, int>, const FeatureRow*> lookup;
  for (const FeatureRow& row : features) {
    lookup[{row.vehicle_id, row.frame}] = &row;
  }

  // Group label indices per vehicle in frame order.
  std::map<int, std::vector<const StepLabel*>> per_vehicle;
  for (const StepLabel& l : labels) per_vehicle[l.vehicle_id].push_back(&l);

  std::vector<Segment> out;
  for (auto& [id, steps] : per_vehicle) {
    std::sort(steps.begin(), steps.end(), [](const auto* a, const auto* b) {
      return a->frame < b->frame;
    });
    std::vector<const FeatureRow*> rows;
    rows.reserve(steps.size());
    for (const StepLabel* l : steps) {
      const auto it = lookup.find({l->vehicle_id, l->frame});
      if (it == lookup.end()) {
        throw ArgumentError("package_segments: no features for vehicle " +
                            std::to_string(l->vehicle_id) + " frame " +
                            std::to_string(l->frame));
      }
      rows.push_back(it->second);
    }
    const int count = static_cast<int>(steps.size());
    for (int end = n - 1; end < count; ++end) {
      const int begin = end - n + 1;
      if (steps[end]->frame - steps[begin]->frame != n - 1) continue;
      Segment seg;
      seg.vehicle_id = id;
      seg.end_frame = steps[end]->frame;
      seg.steps = n;
      seg.dim = static_cast<int>(rows[begin]->values.size());
      seg.label = steps[end]->label;
      seg.features.reserve(static_cast<std::size_t>(n * seg.dim));
      for (int t = begin; t <= end; ++t) {
        if (static_cast<int>(rows[t]->values.size()) != seg.dim) {
          throw ArgumentError("package_segments: ragged feature rows");
        }
        seg.features.insert(seg.features.end(), rows[t]->values.begin(),
                            rows[t]->values.end());
      }
      out.push_back(std::move(seg));
    }
  }
  return out;
}

std::vector<Segment> balance_classes(std::span<const Segment> segments,
                                     std::uint64_t seed,
                                     std::size_t max_per_class) {
  std::array<std::vector<std::size_t>, kNumClasses> pools;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    pools[static_cast<std::size_t>(class_index(segments[i].label))].push_back(i);
  }
  std::size_t n = SIZE_MAX;
  for (Maneuver m : kAllManeuvers) {
    const auto& pool = pools[static_cast<std::size_t>(class_index(m))];
    if (pool.empty()) {
      throw BalanceError("balance: no segments of class " +
                         std::string(to_string(m)));
    }
    n = std::min(n, pool.size());
  }
  if (max_per_class > 0) n = std::min(n, max_per_class);

  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(n * kNumClasses);
  for (auto& pool : pools) {
    // Partial Fisher-Yates: the first n slots become a uniform draw.
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
      chosen.push_back(pool[i]);
    }
  }
  rng.shuffle(chosen);
  std::vector<Segment> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(segments[i]);
  return out;
}

LabeledSequence label_sequence(const Sequence& seq,
                               const LabelingConfig& config) {
  config.validate();
  LabeledSequence result;
  for (int id : seq.vehicle_ids()) {
    const auto track = seq.trajectory(id);
    result.headings[id] = track.size() >= 3
                              ? heading_series(seq, id, config)
                              : std::vector<double>(track.size(), 0.0);
  }
  for (const CrossPoint& cross : find_cross_points(seq)) {
    result.events.push_back(maneuver_window(seq.trajectory(cross.vehicle_id),
                                            result.headings.at(cross.vehicle_id),
                                            cross, config));
  }
  result.labels = label_steps(seq, result.events);
  return result;
}

}  // namespace lcp
