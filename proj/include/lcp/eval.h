#ifndef LCP_EVAL_H_
#define LCP_EVAL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lcp/models.h"
#include "lcp/segment.h"
#include "lcp/types.h"

namespace lcp {

// Rows are the true class, columns the prediction, both in class order.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  void add(Maneuver truth, Maneuver predicted);
  std::size_t row_total(int row) const;
  std::size_t total() const;
  std::size_t correct() const;
  // Row-normalized percentage; 0 for an empty row.
  double percent(int row, int col) const;
  // Diagonal percentage of a row (per-class recall, in percent).
  double class_accuracy(int row) const { return percent(row, row); }
  // Overall accuracy in percent.
  double overall() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

// Throws ArgumentError on empty input or a length mismatch.
ConfusionMatrix confusion(std::span<const Maneuver> truth,
                          std::span<const Maneuver> predicted);
ConfusionMatrix confusion(const Model& model,
                          std::span<const Segment> segments);

// "true,pred_left,pred_follow,pred_right" rows: counts then percentages.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

// Row-normalized SA-LSTM confusion from the reference study, kept for
// side-by-side reporting only.
inline constexpr std::array<std::array<double, kNumClasses>, kNumClasses>
    kReferenceSaLstmPercent = {{{87.40, 12.34, 0.26},
                                {7.47, 85.33, 7.20},
                                {2.94, 11.22, 85.84}}};

struct FramePrediction {
  int frame = 0;
  Maneuver label = Maneuver::kFollow;
};

struct PredictionPoint {
  int vehicle_id = 0;
  int frame = 0;
  Direction direction = Direction::kLeft;

  bool operator==(const PredictionPoint&) const = default;
};

inline constexpr int kDefaultConsecutive = 3;

// Frames t with the same lane-change prediction at t-run+1 .. t (consecutive
// frame numbers), t being the first frame that completes the run. Input must
// be sorted by frame.
std::vector<PredictionPoint> prediction_points(
    int vehicle_id, std::span<const FramePrediction> timeline,
    int consecutive = kDefaultConsecutive);

// Per-frame predictions of every vehicle, keyed by the segment end frame.
std::vector<PredictionPoint> prediction_points(
    std::span<const Segment> segments, std::span<const Maneuver> predicted,
    int consecutive = kDefaultConsecutive);

enum class EventOutcome { kPredicted, kLate, kMissed };

struct EventTiming {
  LaneChangeEvent event;
  EventOutcome outcome = EventOutcome::kMissed;
  // Seconds from the prediction point to the cross frame; negative when late.
  double seconds = 0.0;
  int prediction_frame = -1;
};

struct PredictionTimeReport {
  std::vector<EventTiming> events;
  std::size_t predicted = 0;
  std::size_t late = 0;
  std::size_t missed = 0;
  std::size_t false_alarms = 0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
  double mean_late_seconds = 0.0;
  double miss_rate = 0.0;
};

// Each point is matched, by vehicle and direction, to the nearest cross frame
// at or after it within horizon_s. An event's time comes from its earliest
// matched point. Remaining points that follow the cross frame of a still
// unpredicted event within horizon_s make it late (earliest such point);
// other unmatched points are false alarms.
PredictionTimeReport prediction_time(std::span<const PredictionPoint> points,
                                     std::span<const LaneChangeEvent> events,
                                     double frame_rate, double horizon_s);

// Recomputes the counts and statistics from report.events (false_alarms is
// left as is). Used to merge the reports of several recordings.
void summarize_timings(PredictionTimeReport& report);

std::string_view to_string(EventOutcome outcome);

struct SweepRow {
  ModelKind kind = ModelKind::kSaLstm;
  int n = 0;
  std::uint64_t seed = 0;
  ConfusionMatrix cm;
  int epochs = 0;
  int best_epoch = 0;
  double train_seconds = 0.0;
};

struct SweepSummary {
  ModelKind kind = ModelKind::kSaLstm;
  int n = 0;
  std::size_t runs = 0;
  std::array<double, kNumClasses> mean_class{};
  double mean_overall = 0.0;
  // Sample standard deviation over seeds (0 for a single run).
  double std_overall = 0.0;
};

// One summary per (kind, n) in first-appearance order.
std::vector<SweepSummary> summarize(std::span<const SweepRow> rows);

// Deterministic columns only; wall-clock goes to write_sweep_timing_csv.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_summary_csv(std::ostream& out,
                             std::span<const SweepSummary> summary);
void write_sweep_timing_csv(std::ostream& out, std::span<const SweepRow> rows);
// Mean overall accuracy against n, one polyline per model kind.
void write_sweep_svg(std::ostream& out, std::span<const SweepSummary> summary);

// Fixed six-decimal rendering used by every report.
std::string format_fixed(double value);

}  // namespace lcp

#endif  // LCP_EVAL_H_
