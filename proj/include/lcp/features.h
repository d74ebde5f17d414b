#ifndef LCP_FEATURES_H_
#define LCP_FEATURES_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lcp/ingest.h"
#include "lcp/segment.h"

namespace lcp {

// Fixed feature order. Base vector (12):
//   0 acceleration (m/s^2)        6 gap to preceding-left (m)
//   1 heading (deg, left > 0)     7 gap to preceding (m)
//   2 lateral offset from lane    8 gap to preceding-right (m)
//     center (m, left > 0)        9 gap to following-left (m)
//   3 longitudinal position (m)  10 gap to following, same lane (m)
//   4 left lane present (0/1)    11 gap to following-right (m)
//   5 right lane present (0/1)
// Augmented mode appends the ten traffic-factor inputs (22 total):
//  12..16 incentive, 17..20 safety, 21 tolerance.
inline constexpr int kEgoFeatureCount = 4;
inline constexpr int kNeighborFeatureCount = 8;
inline constexpr int kBaseFeatureCount = 12;
inline constexpr int kTrafficFactorCount = 10;
inline constexpr int kAugmentedFeatureCount = 22;

struct FeatureConfig {
  double gap_cap = 100.0;
  // Safe headway time t_h in seconds.
  double headway_time = 1.5;
  bool augmented = false;

  int dim() const {
    return augmented ? kAugmentedFeatureCount : kBaseFeatureCount;
  }
};

std::vector<std::string> feature_names(bool augmented);
// True for the presence flags, which are never rescaled.
std::vector<bool> normalization_exempt(bool augmented);

// [acceleration, heading, lateral offset, longitudinal position]. The
// longitudinal position is measured from the sequence's origin.
std::array<double, kEgoFeatureCount> ego_features(const Sequence& seq,
                                                  int vehicle_id, int frame,
                                                  double heading_deg);

// [presence_L, presence_R, d_PL, d_P, d_PR, d_FL, d_F, d_FR]; absent
// neighbors read as the context's gap cap.
std::array<double, kNeighborFeatureCount> neighbor_features(
    const NeighborContext& ctx);

struct TrafficFactorInputs {
  // v_E - v_P, v_PL - v_P, v_PR - v_P, d_PL - d_P, d_PR - d_P
  std::array<double, 5> incentive{};
  // d_FL, d_FR, v_E - v_FL, v_E - v_FR
  std::array<double, 4> safety{};
  // d_P - v_E * t_h
  double tolerance = 0.0;

  std::array<double, kTrafficFactorCount> flatten() const;
};

// Absent neighbors take the ego speed (zero speed difference) and the gap
// cap. Throws ArgumentError unless headway_time > 0.
TrafficFactorInputs traffic_factor_inputs(const NeighborContext& ctx,
                                          double headway_time);

// Feature rows for every (vehicle, frame) in the sequence, sorted by
// (vehicle, frame). headings maps vehicle id to its heading series.
FeatureTable compute_features(const Sequence& seq,
                              const std::map<int, std::vector<double>>& headings,
                              const FeatureConfig& config);

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> exempt;
  // Dimensions whose training std was zero (std forced to 1).
  std::vector<int> constant_dims;

  std::size_t dim() const { return mean.size(); }
  // FNV-1a over the bit patterns of mean/stddev/exempt.
  std::uint64_t hash() const;
};

// Population z-score statistics over training rows. Throws ArgumentError on
// an empty training set or ragged rows.
NormalizationStats fit_normalization(std::span<const FeatureRow> training,
                                     const std::vector<bool>& exempt);
NormalizationStats fit_normalization(std::span<const std::vector<double>> rows,
                                     const std::vector<bool>& exempt);

std::vector<double> apply_normalization(std::span<const double> values,
                                        const NormalizationStats& stats);
std::vector<double> denormalize(std::span<const double> values,
                                const NormalizationStats& stats);
// Normalizes every step of every segment in place.
void normalize_segments(std::span<Segment> segments,
                        const NormalizationStats& stats);

}  // namespace lcp

#endif  // LCP_FEATURES_H_
