#include "lcp/features.h"

#include <bit>
#include <cmath>
#include <string>

#include "lcp/errors.h"

namespace lcp {

std::vector<std::string> feature_names(bool augmented) {
  std::vector<std::string> names = {
      "acceleration",     "heading_deg",      "lateral_offset",
      "longitudinal_pos", "left_lane_present", "right_lane_present",
      "gap_preceding_left", "gap_preceding",  "gap_preceding_right",
      "gap_following_left", "gap_following",  "gap_following_right"};
  if (augmented) {
    for (const char* name :
         {"dv_ego_preceding", "dv_pleft_preceding", "dv_pright_preceding",
          "dd_pleft_preceding", "dd_pright_preceding", "gap_following_left_s",
          "gap_following_right_s", "dv_ego_following_left",
          "dv_ego_following_right", "headway_margin"}) {
      names.emplace_back(name);
    }
  }
  return names;
}

std::vector<bool> normalization_exempt(bool augmented) {
  std::vector<bool> exempt(
      augmented ? kAugmentedFeatureCount : kBaseFeatureCount, false);
  exempt[4] = true;
  exempt[5] = true;
  return exempt;
}

std::array<double, kEgoFeatureCount> ego_features(const Sequence& seq,
                                                  int vehicle_id, int frame,
                                                  double heading_deg) {
  const VehicleState& s = seq.at(vehicle_id, frame);
  const double center = seq.site().lane_center(s.lane_id);
  return {s.acceleration, heading_deg, center - s.local_x,
          s.local_y - seq.longitudinal_origin()};
}

std::array<double, kNeighborFeatureCount> neighbor_features(
    const NeighborContext& ctx) {
  const auto gap = [&](Slot slot) {
    const SlotInfo& info = ctx[slot];
    return info.present ? info.gap : ctx.gap_cap;
  };
  return {ctx.left_lane_exists ? 1.0 : 0.0,
          ctx.right_lane_exists ? 1.0 : 0.0,
          gap(Slot::kPrecedingLeft),
          gap(Slot::kPreceding),
          gap(Slot::kPrecedingRight),
          gap(Slot::kFollowingLeft),
          gap(Slot::kFollowing),
          gap(Slot::kFollowingRight)};
}

std::array<double, kTrafficFactorCount> TrafficFactorInputs::flatten() const {
  return {incentive[0], incentive[1], incentive[2], incentive[3], incentive[4],
          safety[0],    safety[1],    safety[2],    safety[3],    tolerance};
}

TrafficFactorInputs traffic_factor_inputs(const NeighborContext& ctx,
                                          double headway_time) {
  if (!(headway_time > 0.0)) {
    throw ArgumentError("traffic factors: headway time must be > 0");
  }
  const double v_e = ctx.ego_speed();
  const auto speed = [&](Slot slot) {
    const SlotInfo& info = ctx[slot];
    return info.present ? info.speed : v_e;
  };
  const auto gap = [&](Slot slot) {
    const SlotInfo& info = ctx[slot];
    return info.present ? info.gap : ctx.gap_cap;
  };
  const double v_p = speed(Slot::kPreceding);
  const double d_p = gap(Slot::kPreceding);
  TrafficFactorInputs in;
  in.incentive = {v_e - v_p, speed(Slot::kPrecedingLeft) - v_p,
                  speed(Slot::kPrecedingRight) - v_p,
                  gap(Slot::kPrecedingLeft) - d_p,
                  gap(Slot::kPrecedingRight) - d_p};
  in.safety = {gap(Slot::kFollowingLeft), gap(Slot::kFollowingRight),
               v_e - speed(Slot::kFollowingLeft),
               v_e - speed(Slot::kFollowingRight)};
  in.tolerance = d_p - v_e * headway_time;
  return in;
}

FeatureTable compute_features(const Sequence& seq,
                              const std::map<int, std::vector<double>>& headings,
                              const FeatureConfig& config) {
  FeatureTable table;
  table.reserve(seq.state_count());
  const NeighborConfig neighbor_config{config.gap_cap};
  for (int id : seq.vehicle_ids()) {
    const auto track = seq.trajectory(id);
    const auto it = headings.find(id);
    if (it == headings.end() || it->second.size() != track.size()) {
      throw ArgumentError("features: missing heading series for vehicle " +
                          std::to_string(id));
    }
    for (std::size_t i = 0; i < track.size(); ++i) {
      const int frame = track[i].frame;
      FeatureRow row;
      row.vehicle_id = id;
      row.frame = frame;
      row.values.reserve(static_cast<std::size_t>(config.dim()));
      const auto ego = ego_features(seq, id, frame, it->second[i]);
      row.values.insert(row.values.end(), ego.begin(), ego.end());
      const NeighborContext ctx = neighbors_at(seq, id, frame, neighbor_config);
      const auto neighbors = neighbor_features(ctx);
      row.values.insert(row.values.end(), neighbors.begin(), neighbors.end());
      if (config.augmented) {
        const auto factors =
            traffic_factor_inputs(ctx, config.headway_time).flatten();
        row.values.insert(row.values.end(), factors.begin(), factors.end());
      }
      table.push_back(std::move(row));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Normalization

std::uint64_t NormalizationStats::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto mix = [&](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mix(std::bit_cast<std::uint64_t>(mean[i]));
    mix(std::bit_cast<std::uint64_t>(stddev[i]));
    mix(exempt[i] ? 1u : 0u);
  }
  return h;
}

NormalizationStats fit_normalization(std::span<const std::vector<double>> rows,
                                     const std::vector<bool>& exempt) {
  if (rows.empty()) {
    throw ArgumentError("normalization: empty training set");
  }
  const std::size_t dim = rows.front().size();
  if (exempt.size() != dim) {
    throw ArgumentError("normalization: exempt mask has wrong length");
  }
  NormalizationStats stats;
  stats.mean.assign(dim, 0.0);
  stats.stddev.assign(dim, 1.0);
  stats.exempt.assign(exempt.begin(), exempt.end());
  for (const auto& row : rows) {
    if (row.size() != dim) throw ArgumentError("normalization: ragged rows");
  }
  const double count = static_cast<double>(rows.size());
  for (std::size_t k = 0; k < dim; ++k) {
    if (exempt[k]) {
      stats.mean[k] = 0.0;
      stats.stddev[k] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const auto& row : rows) sum += row[k];
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& row : rows) {
      const double d = row[k] - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / count);
    stats.mean[k] = mean;
    if (sd > 0.0 && std::isfinite(sd)) {
      stats.stddev[k] = sd;
    } else {
      stats.stddev[k] = 1.0;
      stats.constant_dims.push_back(static_cast<int>(k));
    }
  }
  return stats;
}

NormalizationStats fit_normalization(std::span<const FeatureRow> training,
                                     const std::vector<bool>& exempt) {
  std::vector<std::vector<double>> rows;
  rows.reserve(training.size());
  for (const FeatureRow& r : training) rows.push_back(r.values);
  return fit_normalization(std::span<const std::vector<double>>(rows), exempt);
}

std::vector<double> apply_normalization(std::span<const double> values,
                                        const NormalizationStats& stats) {
  if (values.size() != stats.dim()) {
    throw DimensionError("normalization: vector has " +
                         std::to_string(values.size()) + " dims, stats have " +
                         std::to_string(stats.dim()));
  }
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = stats.exempt[k] ? values[k]
                             : (values[k] - stats.mean[k]) / stats.stddev[k];
  }
  return out;
}

std::vector<double> denormalize(std::span<const double> values,
                                const NormalizationStats& stats) {
  if (values.size() != stats.dim()) {
    throw DimensionError("denormalize: dimension mismatch");
  }
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = stats.exempt[k] ? values[k]
                             : values[k] * stats.stddev[k] + stats.mean[k];
  }
  return out;
}

void normalize_segments(std::span<Segment> segments,
                        const NormalizationStats& stats) {
  for (Segment& seg : segments) {
    if (static_cast<std::size_t>(seg.dim) != stats.dim()) {
      throw DimensionError("normalize_segments: dimension mismatch");
    }
    for (int t = 0; t < seg.steps; ++t) {
      double* step = seg.features.data() + static_cast<std::size_t>(t * seg.dim);
      for (std::size_t k = 0; k < stats.dim(); ++k) {
        if (!stats.exempt[k]) step[k] = (step[k] - stats.mean[k]) / stats.stddev[k];
      }
    }
  }
}

}  // namespace lcp
