#include "lcp/labeling.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "lcp/errors.h"
#include "lcp/synthetic.h"
#include "test_util.h"

namespace lcp {
namespace {

using testing::make_sequence;
using testing::state;

SiteGeometry Site4() { return SiteGeometry::uniform("s", 4, 3.7); }

constexpr double kSpeed = 25.0;
constexpr double kDeg = 180.0 / std::numbers::pi;

// A single vehicle in lane 3 making one 4 s change starting at frame 280.
Scenario SingleChange(Direction d, double jitter = 0.0) {
  ScenarioSpec spec;
  spec.duration_s = 60.0;
  spec.jitter = jitter;
  VehicleScript v;
  v.vehicle_id = 1;
  v.exit_frame = 599;
  v.lane = 3;
  v.speed = kSpeed;
  v.changes = {{280, 4.0, d}};
  spec.vehicles = {v};
  return generate(spec);
}

// Analytic lateral speed (m/s) of the scripted profile at time t (s) after
// the change starts.
double LateralSpeed(double t) {
  const double k = 6.0, duration = 4.0, width = 3.7;
  const double h = 1e-6;
  const auto x = [&](double s) {
    return width * lateral_progress(s / duration, k);
  };
  return (x(t + h) - x(t - h)) / (2 * h);
}

TEST(CrossPoints, LaneKeepingHasNone) {
  ScenarioSpec spec;
  spec.jitter = 0.3;
  VehicleScript v;
  v.vehicle_id = 1;
  v.exit_frame = 599;
  v.lane = 2;
  spec.vehicles = {v};
  EXPECT_TRUE(find_cross_points(generate(spec).sequence).empty());
}

TEST(CrossPoints, SingleLeftChangeMatchesGroundTruth) {
  const Scenario sc = SingleChange(Direction::kLeft, 0.05);
  const auto points = find_cross_points(sc.sequence);
  ASSERT_EQ(points.size(), 1u);
  EXPECT_EQ(points[0].cross_frame, sc.ground_truth[0].cross_frame);
  EXPECT_EQ(points[0].direction, Direction::kLeft);
}

TEST(CrossPoints, ZigZagGivesOppositeDirections) {
  const SiteGeometry site = Site4();
  std::vector<VehicleState> states;
  const double xs[] = {5.0, 5.5, 7.2, 7.5, 7.6, 7.3, 6.0};
  for (int f = 0; f < 7; ++f) {
    states.push_back(state(1, f, xs[f], 2.5 * f, *site.lane_at(xs[f])));
  }
  const auto points = find_cross_points(make_sequence(site, states));
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0], (CrossPoint{1, 3, Direction::kRight}));
  EXPECT_EQ(points[1], (CrossPoint{1, 5, Direction::kLeft}));
}

TEST(CrossPoints, FrameGapsDoNotCreateCrossings) {
  const SiteGeometry site = Site4();
  const auto points = find_cross_points(make_sequence(
      site, {state(1, 0, 2.0, 0, 1), state(1, 1, 2.0, 2, 1),
             state(1, 5, 5.5, 12, 2), state(1, 6, 5.5, 14, 2)}));
  EXPECT_TRUE(points.empty());
}

TEST(Heading, StraightIsZero) {
  std::vector<VehicleState> states;
  for (int f = 0; f < 20; ++f) states.push_back(state(1, f, 5.55, 2.5 * f, 2));
  const Sequence seq = make_sequence(Site4(), states);
  for (double h : heading_series(seq, 1, {})) EXPECT_EQ(h, 0.0);
}

TEST(Heading, DiagonalIsFortyFiveDegrees) {
  std::vector<VehicleState> states;
  // Moving left (x decreasing) as fast as forward.
  for (int f = 0; f < 20; ++f) {
    states.push_back(state(1, f, 12.0 - 0.5 * f, 0.5 * f, 1));
  }
  const Sequence seq = make_sequence(Site4(), states);
  const auto h = heading_series(seq, 1, {});
  for (std::size_t i = 1; i + 1 < h.size(); ++i) EXPECT_NEAR(h[i], 45.0, 1e-12);
}

TEST(Heading, StationaryIsZeroAndPureLateralIsNinety) {
  std::vector<VehicleState> still, sideways;
  for (int f = 0; f < 5; ++f) {
    still.push_back(state(1, f, 5.0, 10.0, 2));
    sideways.push_back(state(2, f, 5.0 + 0.1 * f, 10.0, 2));
  }
  LabelingConfig cfg;
  cfg.heading_smooth_window = 0.1;
  for (double h : heading_series(make_sequence(Site4(), still), 1, cfg)) {
    EXPECT_EQ(h, 0.0);
  }
  for (double h : heading_series(make_sequence(Site4(), sideways), 2, cfg)) {
    EXPECT_NEAR(h, -90.0, 1e-12);
  }
}

TEST(Heading, TooShort) {
  const Sequence seq = make_sequence(
      Site4(), {state(1, 0, 5, 0, 2), state(1, 1, 5, 2, 2)});
  EXPECT_THROW(heading_series(seq, 1, {}), ArgumentError);
}

TEST(Heading, SigmoidPeakMatchesDenseOracle) {
  LabelingConfig cfg;
  cfg.heading_smooth_window = 0.1;  // one frame: no smoothing
  for (Direction d : {Direction::kLeft, Direction::kRight}) {
    const Scenario sc = SingleChange(d);
    const auto h = heading_series(sc.sequence, 1, cfg);
    double peak = 0.0;
    for (double v : h) peak = std::max(peak, std::abs(v));
    double oracle = 0.0;
    for (double t = 0.0; t <= 4.0; t += 1e-3) {
      oracle = std::max(oracle, std::atan2(LateralSpeed(t), kSpeed) * kDeg);
    }
    EXPECT_NEAR(peak, oracle, 0.1);
    const double signed_peak = d == Direction::kLeft ? peak : -peak;
    EXPECT_TRUE(std::find_if(h.begin(), h.end(), [&](double v) {
                  return v == signed_peak;
                }) != h.end());
  }
}

TEST(ManeuverWindow, ContainedInInspectionWindow) {
  const Scenario sc = SingleChange(Direction::kLeft, 0.05);
  const auto points = find_cross_points(sc.sequence);
  ASSERT_EQ(points.size(), 1u);
  const LaneChangeEvent e = maneuver_window(sc.sequence, points[0], {});
  EXPECT_FALSE(e.low_confidence);
  EXPECT_LE(e.start_frame, e.cross_frame);
  EXPECT_GE(e.end_frame, e.cross_frame);
  EXPECT_GE(e.start_frame, e.cross_frame - 20);
  EXPECT_LE(e.end_frame, e.cross_frame + 20);
  EXPECT_EQ(e.direction, Direction::kLeft);
}

TEST(ManeuverWindow, ZeroThresholdSpansFullWindow) {
  const Scenario sc = SingleChange(Direction::kRight, 0.05);
  const auto points = find_cross_points(sc.sequence);
  LabelingConfig cfg;
  cfg.theta_bound = 0.0;
  const LaneChangeEvent e = maneuver_window(sc.sequence, points[0], cfg);
  EXPECT_EQ(e.start_frame, e.cross_frame - 20);
  EXPECT_EQ(e.end_frame, e.cross_frame + 20);
}

TEST(ManeuverWindow, MatchesAnalyticThresholdFrames) {
  const Scenario sc = SingleChange(Direction::kLeft);
  const auto points = find_cross_points(sc.sequence);
  const LaneChangeEvent e = maneuver_window(sc.sequence, points[0], {});
  // Solve atan(v_lat(t) / v) = 2 deg on the rising and falling flanks.
  const double target = kSpeed * std::tan(2.0 / kDeg);
  const auto solve = [&](double lo, double hi) {
    const bool rising = LateralSpeed(lo) < LateralSpeed(hi);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((LateralSpeed(mid) < target) == rising) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
  const double t_start = solve(0.0, 2.0);
  const double t_end = solve(2.0, 4.0);
  const int start = 280 + static_cast<int>(std::ceil(t_start * 10.0));
  const int end = 280 + static_cast<int>(std::floor(t_end * 10.0));
  EXPECT_NEAR(e.start_frame, start, 1);
  EXPECT_NEAR(e.end_frame, end, 1);
}

TEST(ManeuverWindow, LowConfidenceWhenCrossFrameBelowThreshold) {
  const SiteGeometry site = Site4();
  std::vector<VehicleState> states;
  for (int f = 0; f < 20; ++f) {
    // Slow drift across the 3.7 m boundary: about 0.2 degrees.
    const double x = 3.0 + 0.08 * f;
    states.push_back(state(1, f, x, 25.0 * f, *site.lane_at(x)));
  }
  const Sequence seq = make_sequence(site, states);
  const auto points = find_cross_points(seq);
  ASSERT_EQ(points.size(), 1u);
  const LaneChangeEvent e = maneuver_window(seq, points[0], {});
  EXPECT_TRUE(e.low_confidence);
  EXPECT_EQ(e.start_frame, e.cross_frame);
  EXPECT_EQ(e.end_frame, e.cross_frame);
}

TEST(ManeuverWindow, OutOfBoundsCross) {
  const Scenario sc = SingleChange(Direction::kLeft);
  EXPECT_THROW(maneuver_window(sc.sequence, {1, 5000, Direction::kLeft}, {}),
               ArgumentError);
}

TEST(ManeuverWindow, ShrinkingThresholdNeverShrinksWindow) {
  RandomScenarioOptions opt;
  opt.duration_s = 120.0;
  opt.seed = 13;
  const Scenario sc = generate(random_scenario(opt));
  const auto points = find_cross_points(sc.sequence);
  ASSERT_FALSE(points.empty());
  for (const CrossPoint& p : points) {
    LaneChangeEvent previous{};
    bool first = true;
    for (double bound : {4.0, 3.0, 2.0, 1.0, 0.5, 0.0}) {
      LabelingConfig cfg;
      cfg.theta_bound = bound;
      const LaneChangeEvent e = maneuver_window(sc.sequence, p, cfg);
      if (!first) {
        EXPECT_LE(e.start_frame, previous.start_frame);
        EXPECT_GE(e.end_frame, previous.end_frame);
      }
      previous = e;
      first = false;
    }
  }
}

Sequence Straight(int id, int frames, int first = 0) {
  std::vector<VehicleState> states;
  for (int f = first; f < first + frames; ++f) {
    states.push_back(state(id, f, 5.55, 2.5 * f, 2));
  }
  return make_sequence(Site4(), states);
}

TEST(LabelSteps, NoEventsAllFollow) {
  const Sequence seq = Straight(1, 30);
  const auto labels = label_steps(seq, {});
  ASSERT_EQ(labels.size(), 30u);
  for (const StepLabel& l : labels) EXPECT_EQ(l.label, Maneuver::kFollow);
}

TEST(LabelSteps, SingleEventEnumeration) {
  const Sequence seq = Straight(1, 600);
  const std::vector<LaneChangeEvent> events = {
      {1, 300, 280, 320, Direction::kLeft, false}};
  const auto labels = label_steps(seq, events);
  for (const StepLabel& l : labels) {
    const bool inside = l.frame >= 280 && l.frame <= 320;
    EXPECT_EQ(l.label, inside ? Maneuver::kLeft : Maneuver::kFollow) << l.frame;
  }
}

TEST(LabelSteps, BackToBackAndOverlapRules) {
  const Sequence seq = Straight(1, 100);
  // Left window 10..30 (cross 20), right window 26..50 (cross 40). Frames
  // 26..30 are shared: nearer cross wins, 30 is equidistant (10 each) and
  // goes to the earlier event.
  const std::vector<LaneChangeEvent> events = {
      {1, 40, 26, 50, Direction::kRight, false},
      {1, 20, 10, 30, Direction::kLeft, false}};
  const auto labels = label_steps(seq, events);
  for (const StepLabel& l : labels) {
    Maneuver expected = Maneuver::kFollow;
    if (l.frame >= 10 && l.frame <= 30) expected = Maneuver::kLeft;
    if (l.frame > 30 && l.frame <= 50) expected = Maneuver::kRight;
    EXPECT_EQ(l.label, expected) << l.frame;
  }
}

TEST(LabelSteps, OneLabelPerVehicleFrame) {
  RandomScenarioOptions opt;
  opt.duration_s = 60.0;
  const Scenario sc = generate(random_scenario(opt));
  const LabeledSequence ls = label_sequence(sc.sequence, {});
  EXPECT_EQ(ls.labels.size(), sc.sequence.state_count());
  std::set<std::pair<int, int>> seen;
  for (const StepLabel& l : ls.labels) {
    EXPECT_TRUE(seen.insert({l.vehicle_id, l.frame}).second);
    EXPECT_NE(sc.sequence.find(l.vehicle_id, l.frame), nullptr);
  }
}

FeatureTable Rows(const std::vector<StepLabel>& labels) {
  FeatureTable table;
  for (const StepLabel& l : labels) {
    table.push_back({l.vehicle_id, l.frame, {double(l.frame), 1.0}});
  }
  return table;
}

TEST(PackageSegments, CountsAndLabels) {
  const Sequence ten = Straight(1, 10);
  const auto labels = label_steps(ten, {});
  const auto segs = package_segments(labels, Rows(labels), 6);
  ASSERT_EQ(segs.size(), 5u);
  for (const Segment& s : segs) {
    EXPECT_EQ(s.label, Maneuver::kFollow);
    EXPECT_EQ(s.steps, 6);
    EXPECT_EQ(s.dim, 2);
    EXPECT_EQ(s.step(0)[0], s.first_frame());
    EXPECT_EQ(s.step(5)[0], s.end_frame);
  }
  EXPECT_TRUE(package_segments(label_steps(Straight(1, 11), {}),
                               Rows(label_steps(Straight(1, 11), {})), 12)
                  .empty());
  EXPECT_THROW(package_segments(labels, Rows(labels), 1), ArgumentError);
}

TEST(PackageSegments, LabelFromLastStep) {
  const Sequence seq = Straight(1, 600);
  const std::vector<LaneChangeEvent> events = {
      {1, 300, 280, 320, Direction::kLeft, false}};
  const auto labels = label_steps(seq, events);
  const auto segs = package_segments(labels, Rows(labels), 9);
  for (const Segment& s : segs) {
    if (s.end_frame == 284) {
      EXPECT_EQ(s.label, Maneuver::kLeft);
    } else if (s.end_frame == 279) {
      EXPECT_EQ(s.label, Maneuver::kFollow);
    }
    const bool inside = s.end_frame >= 280 && s.end_frame <= 320;
    EXPECT_EQ(s.label, inside ? Maneuver::kLeft : Maneuver::kFollow);
  }
}

TEST(PackageSegments, GapsDropWindows) {
  std::vector<VehicleState> states;
  for (int f : {0, 1, 2, 3, 4, 5, 10, 11, 12, 13, 14, 15, 16}) {
    states.push_back(state(1, f, 5.55, 2.5 * f, 2));
  }
  const auto labels = label_steps(make_sequence(Site4(), states), {});
  const auto segs = package_segments(labels, Rows(labels), 6);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0].end_frame, 5);
  EXPECT_EQ(segs[1].end_frame, 15);
  EXPECT_EQ(segs[2].end_frame, 16);
}

TEST(PackageSegments, MissingFeatures) {
  const auto labels = label_steps(Straight(1, 10), {});
  FeatureTable rows = Rows(labels);
  rows.pop_back();
  EXPECT_THROW(package_segments(labels, rows, 3), ArgumentError);
}

std::vector<Segment> Pools(int left, int follow, int right) {
  std::vector<Segment> out;
  int id = 0;
  const auto add = [&](int count, Maneuver m) {
    for (int i = 0; i < count; ++i) {
      Segment s;
      s.vehicle_id = id++;
      s.label = m;
      out.push_back(s);
    }
  };
  add(left, Maneuver::kLeft);
  add(follow, Maneuver::kFollow);
  add(right, Maneuver::kRight);
  return out;
}

std::array<int, 3> Counts(const std::vector<Segment>& segs) {
  std::array<int, 3> c{};
  for (const Segment& s : segs) ++c[class_index(s.label)];
  return c;
}

TEST(Balance, AlreadyBalancedKeepsAllShuffled) {
  const auto segs = Pools(5, 5, 5);
  const auto out = balance_classes(segs, 1);
  EXPECT_EQ(out.size(), 15u);
  std::set<int> ids;
  for (const Segment& s : out) ids.insert(s.vehicle_id);
  EXPECT_EQ(ids.size(), 15u);
  bool reordered = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    reordered |= out[i].vehicle_id != static_cast<int>(i);
  }
  EXPECT_TRUE(reordered);
}

TEST(Balance, MinPoolAndSeededReproduction) {
  const auto segs = Pools(10, 50, 7);
  const auto a = balance_classes(segs, 42);
  const auto b = balance_classes(segs, 42);
  EXPECT_EQ(a.size(), 21u);
  EXPECT_EQ(Counts(a), (std::array<int, 3>{7, 7, 7}));
  EXPECT_EQ(a, b);
  EXPECT_NE(balance_classes(segs, 43), a);
}

TEST(Balance, LargePools) {
  const auto out = balance_classes(Pools(41000, 400000, 30000), 7);
  EXPECT_EQ(Counts(out), (std::array<int, 3>{30000, 30000, 30000}));
}

TEST(Balance, CapAndEmptyPool) {
  EXPECT_EQ(Counts(balance_classes(Pools(10, 50, 7), 1, 4)),
            (std::array<int, 3>{4, 4, 4}));
  try {
    balance_classes(Pools(3, 3, 0), 1);
    FAIL();
  } catch (const BalanceError& e) {
    EXPECT_NE(std::string(e.what()).find("Right"), std::string::npos)
        << e.what();
  }
}

TEST(OracleEquivalence, RecoversScriptedEvents) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomScenarioOptions opt;
    opt.seed = seed;
    opt.duration_s = 90.0;
    const Scenario sc = generate(random_scenario(opt));
    const LabeledSequence ls = label_sequence(sc.sequence, {});
    ASSERT_EQ(ls.events.size(), sc.ground_truth.size()) << "seed " << seed;
    for (std::size_t i = 0; i < ls.events.size(); ++i) {
      EXPECT_EQ(ls.events[i].vehicle_id, sc.ground_truth[i].vehicle_id);
      EXPECT_EQ(ls.events[i].direction, sc.ground_truth[i].direction);
      EXPECT_EQ(ls.events[i].cross_frame, sc.ground_truth[i].cross_frame);
      EXPECT_FALSE(ls.events[i].low_confidence);
    }
  }
}

}  // namespace
}  // namespace lcp
