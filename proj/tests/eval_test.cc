#include "lcp/eval.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lcp/errors.h"

namespace lcp {
namespace {

constexpr Maneuver L = Maneuver::kLeft;
constexpr Maneuver F = Maneuver::kFollow;
constexpr Maneuver R = Maneuver::kRight;

TEST(ConfusionTest, PerfectClassifierIsDiagonal) {
  const std::vector<Maneuver> truth = {L, F, R, L, F, R, F};
  const ConfusionMatrix cm = confusion(truth, truth);
  for (int r = 0; r < kNumClasses; ++r) {
    for (int c = 0; c < kNumClasses; ++c) {
      EXPECT_EQ(cm.percent(r, c), r == c ? 100.0 : 0.0);
    }
  }
  EXPECT_EQ(cm.overall(), 100.0);
}

TEST(ConfusionTest, HandBuiltTenSegments) {
  const std::vector<Maneuver> truth = {L, L, L, L, F, F, F, R, R, R};
  const std::vector<Maneuver> pred = {L, L, F, R, F, F, L, R, F, R};
  const ConfusionMatrix cm = confusion(truth, pred);
  const std::array<std::array<std::size_t, 3>, 3> expected = {
      {{2, 1, 1}, {1, 2, 0}, {0, 1, 2}}};
  EXPECT_EQ(cm.counts, expected);
  EXPECT_EQ(cm.total(), 10u);
  EXPECT_EQ(cm.correct(), 6u);
  EXPECT_DOUBLE_EQ(cm.percent(0, 0), 50.0);
  EXPECT_DOUBLE_EQ(cm.percent(1, 0), 100.0 / 3.0);
  EXPECT_DOUBLE_EQ(cm.overall(), 60.0);
}

TEST(ConfusionTest, RowsSumToHundred) {
  std::vector<Maneuver> truth, pred;
  for (int i = 0; i < 997; ++i) {
    truth.push_back(maneuver_from_index(i % 3));
    pred.push_back(maneuver_from_index((i * 7 / 5) % 3));
  }
  const ConfusionMatrix cm = confusion(truth, pred);
  for (int r = 0; r < kNumClasses; ++r) {
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) sum += cm.percent(r, c);
    EXPECT_NEAR(sum, 100.0, 1e-9);
  }
}

TEST(ConfusionTest, Errors) {
  const std::vector<Maneuver> none;
  EXPECT_THROW(confusion(none, none), ArgumentError);
  const std::vector<Maneuver> one = {L};
  const std::vector<Maneuver> two = {L, F};
  EXPECT_THROW(confusion(one, two), ArgumentError);
}

TEST(ConfusionTest, ZeroLogRegPredictsLeft) {
  ModelSpec spec;
  spec.kind = ModelKind::kLogReg;
  spec.n = 3;
  auto model = build(spec, 1);
  for (auto& block : model->params()) block.value.fill(0.0);
  std::vector<Segment> segments;
  for (int i = 0; i < 6; ++i) {
    Segment s;
    s.vehicle_id = 1;
    s.end_frame = i + 2;
    s.steps = 3;
    s.dim = 12;
    s.label = maneuver_from_index(i % 3);
    s.features.assign(36, 0.1 * i);
    segments.push_back(s);
  }
  const ConfusionMatrix cm = confusion(*model, segments);
  for (int r = 0; r < kNumClasses; ++r) EXPECT_EQ(cm.percent(r, 0), 100.0);
  EXPECT_THROW(confusion(*model, std::span<const Segment>()), ArgumentError);
}

TEST(ConfusionTest, ReferenceCardRowsSumToHundred) {
  for (const auto& row : kReferenceSaLstmPercent) {
    EXPECT_NEAR(row[0] + row[1] + row[2], 100.0, 1e-9);
  }
}

TEST(ConfusionTest, CsvLayout) {
  const std::vector<Maneuver> truth = {L, F, R, R};
  const std::vector<Maneuver> pred = {L, F, R, F};
  std::ostringstream out;
  write_confusion_csv(out, confusion(truth, pred));
  EXPECT_EQ(out.str(),
            "true,kind,pred_left,pred_follow,pred_right,row_total\n"
            "Left,count,1,0,0,1\n"
            "Follow,count,0,1,0,1\n"
            "Right,count,0,1,1,2\n"
            "Left,percent,100.000000,0.000000,0.000000,100.000000\n"
            "Follow,percent,0.000000,100.000000,0.000000,100.000000\n"
            "Right,percent,0.000000,50.000000,50.000000,100.000000\n");
}

// Stream notation: one character per frame starting at frame 1; '.' is a
// frame without a prediction.
std::vector<FramePrediction> stream(const std::string& text, int first = 1) {
  std::vector<FramePrediction> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const int frame = first + static_cast<int>(i);
    switch (text[i]) {
      case 'L':
        out.push_back({frame, L});
        break;
      case 'F':
        out.push_back({frame, F});
        break;
      case 'R':
        out.push_back({frame, R});
        break;
      default:
        break;
    }
  }
  return out;
}

struct StreamCase {
  std::string text;
  std::vector<std::pair<int, Direction>> points;
};

constexpr Direction kL = Direction::kLeft;
constexpr Direction kR = Direction::kRight;

const std::vector<StreamCase>& stream_cases() {
  static const std::vector<StreamCase> cases = {
      {"FFFFFF", {}},
      {"FFLLLL", {{5, kL}}},
      {"LLFLLL", {{6, kL}}},
      {"LLL", {{3, kL}}},
      {"LL", {}},
      {"RRRRRRR", {{3, kR}}},
      {"LLLRRR", {{3, kL}, {6, kR}}},
      {"LLLFLLL", {{3, kL}, {7, kL}}},
      {"LL.LL", {}},
      {"LLL.LLL", {{3, kL}, {7, kL}}},
      {"RRLRRR", {{6, kR}}},
      {"FRFRFR", {}},
      {"LLLLLLLLLL", {{3, kL}}},
      {"RRRFFFLLL", {{3, kR}, {9, kL}}},
      {"", {}},
      {"LRLRLRRR", {{8, kR}}},
      {"FFFRRRFFFRR", {{6, kR}}},
      {"L", {}},
      {"RR.R", {}},
      {"LLLLFFRRRRFLLL", {{3, kL}, {9, kR}, {14, kL}}},
  };
  return cases;
}

std::vector<PredictionPoint> expected_points(const StreamCase& c, int id,
                                             int offset = 0) {
  std::vector<PredictionPoint> out;
  for (const auto& [frame, dir] : c.points) {
    out.push_back(PredictionPoint{id, frame + offset, dir});
  }
  return out;
}

TEST(PredictionPointsTest, TwentyHandEnumeratedStreams) {
  ASSERT_EQ(stream_cases().size(), 20u);
  for (const StreamCase& c : stream_cases()) {
    EXPECT_EQ(prediction_points(7, stream(c.text)), expected_points(c, 7))
        << "stream '" << c.text << "'";
  }
}

TEST(PredictionPointsTest, ShiftedFramesShiftPoints) {
  for (const StreamCase& c : stream_cases()) {
    EXPECT_EQ(prediction_points(3, stream(c.text, 501)),
              expected_points(c, 3, 500))
        << "stream '" << c.text << "'";
  }
}

TEST(PredictionPointsTest, AppendingFollowChangesNothing) {
  for (const StreamCase& c : stream_cases()) {
    EXPECT_EQ(prediction_points(1, stream(c.text + "FFFF")),
              prediction_points(1, stream(c.text)))
        << "stream '" << c.text << "'";
  }
}

TEST(PredictionPointsTest, FromSegments) {
  // Two vehicles, segments given out of order.
  std::vector<Segment> segments;
  std::vector<Maneuver> predicted;
  const auto add = [&](int id, int frame, Maneuver m) {
    Segment s;
    s.vehicle_id = id;
    s.end_frame = frame;
    segments.push_back(s);
    predicted.push_back(m);
  };
  add(2, 12, R);
  add(1, 5, L);
  add(2, 10, R);
  add(1, 3, L);
  add(1, 4, L);
  add(2, 11, R);
  const std::vector<PredictionPoint> expected = {{1, 5, kL}, {2, 12, kR}};
  EXPECT_EQ(prediction_points(segments, predicted), expected);
}

TEST(PredictionTimeTest, FourSecondsAtTenHertz) {
  const std::vector<PredictionPoint> points = {{1, 280, kL}};
  const std::vector<LaneChangeEvent> events = {{1, 320, 300, 340, kL}};
  const auto report = prediction_time(points, events, 10.0, 6.0);
  ASSERT_EQ(report.events.size(), 1u);
  EXPECT_EQ(report.events[0].outcome, EventOutcome::kPredicted);
  EXPECT_EQ(report.events[0].seconds, 4.0);
  EXPECT_EQ(report.events[0].prediction_frame, 280);
  EXPECT_EQ(report.predicted, 1u);
  EXPECT_EQ(report.mean_seconds, 4.0);
  EXPECT_EQ(report.median_seconds, 4.0);
  EXPECT_EQ(report.miss_rate, 0.0);
}

TEST(PredictionTimeTest, ExactArithmeticOverFrames) {
  for (int lead = 0; lead <= 60; ++lead) {
    const std::vector<PredictionPoint> points = {{1, 1000 - lead, kR}};
    const std::vector<LaneChangeEvent> events = {{1, 1000, 990, 1010, kR}};
    const auto report = prediction_time(points, events, 10.0, 6.0);
    EXPECT_EQ(report.events[0].seconds, lead / 10.0);
  }
}

TEST(PredictionTimeTest, LateIsNegativeAndSeparate) {
  const std::vector<PredictionPoint> points = {{1, 305, kL}};
  const std::vector<LaneChangeEvent> events = {{1, 300, 290, 310, kL}};
  const auto report = prediction_time(points, events, 10.0, 6.0);
  EXPECT_EQ(report.events[0].outcome, EventOutcome::kLate);
  EXPECT_EQ(report.events[0].seconds, -0.5);
  EXPECT_EQ(report.late, 1u);
  EXPECT_EQ(report.predicted, 0u);
  EXPECT_EQ(report.mean_late_seconds, -0.5);
  EXPECT_EQ(report.mean_seconds, 0.0);
}

TEST(PredictionTimeTest, NoPointsMeansMissed) {
  const std::vector<LaneChangeEvent> events = {{1, 300, 290, 310, kL},
                                               {2, 100, 90, 110, kR}};
  const auto report = prediction_time({}, events, 10.0, 6.0);
  EXPECT_EQ(report.missed, 2u);
  EXPECT_EQ(report.miss_rate, 1.0);
  for (const auto& t : report.events) {
    EXPECT_EQ(t.outcome, EventOutcome::kMissed);
    EXPECT_EQ(t.prediction_frame, -1);
  }
}

TEST(PredictionTimeTest, FalseAlarms) {
  const std::vector<PredictionPoint> points = {
      {1, 280, kL},   // 12 s ahead: beyond the horizon
      {1, 395, kR},   // wrong direction
      {2, 390, kL},   // other vehicle
  };
  const std::vector<LaneChangeEvent> events = {{1, 400, 390, 410, kL}};
  const auto report = prediction_time(points, events, 10.0, 6.0);
  EXPECT_EQ(report.false_alarms, 3u);
  EXPECT_EQ(report.missed, 1u);
}

TEST(PredictionTimeTest, EarliestMatchedPointWins) {
  const std::vector<PredictionPoint> points = {{1, 290, kL}, {1, 270, kL}};
  const std::vector<LaneChangeEvent> events = {{1, 300, 290, 310, kL}};
  const auto report = prediction_time(points, events, 10.0, 6.0);
  EXPECT_EQ(report.events[0].prediction_frame, 270);
  EXPECT_EQ(report.events[0].seconds, 3.0);
  EXPECT_EQ(report.false_alarms, 0u);
}

TEST(PredictionTimeTest, PointGoesToNearestSubsequentCross) {
  const std::vector<PredictionPoint> points = {{1, 340, kL}};
  const std::vector<LaneChangeEvent> events = {{1, 300, 290, 310, kL},
                                               {1, 360, 350, 370, kL}};
  const auto report = prediction_time(points, events, 10.0, 6.0);
  EXPECT_EQ(report.events[0].outcome, EventOutcome::kMissed);
  EXPECT_EQ(report.events[1].outcome, EventOutcome::kPredicted);
  EXPECT_EQ(report.events[1].seconds, 2.0);
}

TEST(PredictionTimeTest, MedianOfEvenCount) {
  std::vector<PredictionPoint> points;
  std::vector<LaneChangeEvent> events;
  for (int i = 1; i <= 4; ++i) {
    points.push_back({i, 100 - 10 * i, kR});
    events.push_back({i, 100, 95, 105, kR});
  }
  const auto report = prediction_time(points, events, 10.0, 6.0);
  EXPECT_EQ(report.mean_seconds, 2.5);
  EXPECT_EQ(report.median_seconds, 2.5);
}

TEST(PredictionTimeTest, EveryEventHasExactlyOneOutcome) {
  std::vector<PredictionPoint> points;
  std::vector<LaneChangeEvent> events;
  for (int i = 0; i < 40; ++i) {
    const Direction d = i % 2 ? kL : kR;
    events.push_back({i, 500, 480, 520, d});
    if (i % 4 == 0) points.push_back({i, 470, d});
    if (i % 4 == 1) points.push_back({i, 530, d});
    if (i % 4 == 2) points.push_back({i, 470, i % 2 ? kR : kL});
  }
  const auto report = prediction_time(points, events, 10.0, 6.0);
  EXPECT_EQ(report.predicted + report.late + report.missed, events.size());
  EXPECT_EQ(report.predicted, 10u);
  EXPECT_EQ(report.late, 10u);
  EXPECT_EQ(report.missed, 20u);
  EXPECT_EQ(report.false_alarms, 10u);
}

SweepRow row(ModelKind kind, int n, std::uint64_t seed, int correct) {
  SweepRow r;
  r.kind = kind;
  r.n = n;
  r.seed = seed;
  for (int c = 0; c < kNumClasses; ++c) {
    r.cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)] =
        static_cast<std::size_t>(correct);
    r.cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>((c + 1) % 3)] =
        static_cast<std::size_t>(100 - correct);
  }
  return r;
}

TEST(SweepTest, SummaryMeansAndSampleStd) {
  const std::vector<SweepRow> rows = {row(ModelKind::kSaLstm, 6, 1, 90),
                                      row(ModelKind::kSaLstm, 6, 2, 92),
                                      row(ModelKind::kSaLstm, 6, 3, 94),
                                      row(ModelKind::kFfnn, 6, 1, 80)};
  const auto summary = summarize(rows);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].kind, ModelKind::kSaLstm);
  EXPECT_EQ(summary[0].runs, 3u);
  EXPECT_NEAR(summary[0].mean_overall, 92.0, 1e-12);
  EXPECT_NEAR(summary[0].std_overall, 2.0, 1e-12);
  EXPECT_NEAR(summary[0].mean_class[1], 92.0, 1e-12);
  EXPECT_EQ(summary[1].runs, 1u);
  EXPECT_EQ(summary[1].std_overall, 0.0);
}

TEST(SweepTest, SingleNGivesSingleRow) {
  const std::vector<SweepRow> rows = {row(ModelKind::kLogReg, 9, 1, 70)};
  std::ostringstream out;
  write_sweep_summary_csv(out, summarize(rows));
  EXPECT_EQ(out.str(),
            "model,n,runs,mean_left,mean_follow,mean_right,mean_overall,"
            "std_overall\n"
            "LOGREG,9,1,70.000000,70.000000,70.000000,70.000000,0.000000\n");
}

TEST(SweepTest, PlotHasOneCurvePerKind) {
  std::vector<SweepRow> rows;
  for (ModelKind kind : kAllModelKinds) {
    for (int n : {6, 9, 12}) rows.push_back(row(kind, n, 1, 80 + n));
  }
  std::ostringstream out;
  write_sweep_svg(out, summarize(rows));
  const std::string svg = out.str();
  std::size_t curves = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++curves;
  }
  EXPECT_EQ(curves, 3u);
  for (ModelKind kind : kAllModelKinds) {
    EXPECT_NE(svg.find("data-model=\"" + std::string(display_name(kind)) + "\""),
              std::string::npos);
  }
}

TEST(SweepTest, CsvIsDeterministicAndOmitsTiming) {
  std::vector<SweepRow> rows = {row(ModelKind::kSaLstm, 6, 1, 90)};
  rows[0].train_seconds = 12.5;
  std::ostringstream a, b;
  write_sweep_csv(a, rows);
  rows[0].train_seconds = 99.0;
  write_sweep_csv(b, rows);
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream timing;
  write_sweep_timing_csv(timing, rows);
  EXPECT_NE(timing.str().find("99.000000"), std::string::npos);
}

}  // namespace
}  // namespace lcp
