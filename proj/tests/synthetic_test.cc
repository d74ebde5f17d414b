#include "lcp/synthetic.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lcp/errors.h"

namespace lcp {
namespace {

VehicleScript Car(int id, int lane, double speed = 25.0) {
  VehicleScript v;
  v.vehicle_id = id;
  v.entry_frame = 0;
  v.exit_frame = 100000;
  v.lane = lane;
  v.speed = speed;
  return v;
}

ScenarioSpec Base() {
  ScenarioSpec spec;
  spec.seed = 9;
  spec.duration_s = 60.0;
  spec.lane_count = 4;
  return spec;
}

TEST(LateralProgress, EndpointsAndInverse) {
  EXPECT_NEAR(lateral_progress(0.0, 6.0), 0.0, 1e-15);
  EXPECT_NEAR(lateral_progress(1.0, 6.0), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(lateral_progress(0.5, 6.0), 0.5);
  for (double p : {0.1, 0.25, 0.5, 0.77, 0.99}) {
    EXPECT_NEAR(lateral_progress(lateral_progress_inverse(p, 6.0), 6.0), p,
                1e-12);
  }
}

TEST(Generate, NoChanges) {
  ScenarioSpec spec = Base();
  spec.vehicles = {Car(1, 1), Car(2, 3, 20.0)};
  const Scenario sc = generate(spec);
  EXPECT_TRUE(sc.ground_truth.empty());
  for (int id : {1, 2}) {
    const auto track = sc.sequence.trajectory(id);
    ASSERT_EQ(track.size(), 600u);
    for (const VehicleState& s : track) {
      EXPECT_EQ(s.lane_id, track.front().lane_id);
    }
  }
}

TEST(Generate, ZeroJitterIsExactlyLaneCenter) {
  ScenarioSpec spec = Base();
  spec.jitter = 0.0;
  VehicleScript v = Car(1, 2);
  v.changes = {{300, 4.0, Direction::kRight}};
  spec.vehicles = {v};
  const Scenario sc = generate(spec);
  const SiteGeometry site = spec.site();
  for (const VehicleState& s : sc.sequence.trajectory(1)) {
    if (s.frame < 300) {
      EXPECT_EQ(s.local_x, site.lane_center(2));
    } else if (s.frame > 340) {
      EXPECT_EQ(s.local_x, site.lane_center(3));
    }
  }
}

TEST(Generate, JitterBoundedDuringLaneKeeping) {
  ScenarioSpec spec = Base();
  spec.jitter = 0.05;
  spec.vehicles = {Car(1, 2)};
  const Scenario sc = generate(spec);
  double max_dev = 0.0;
  for (const VehicleState& s : sc.sequence.trajectory(1)) {
    max_dev = std::max(max_dev, std::abs(s.local_x - 5.55));
  }
  EXPECT_LE(max_dev, 0.05);
  EXPECT_GT(max_dev, 0.0);
}

TEST(Generate, LeftChangeCrossFrameMatchesAnalyticSolution) {
  ScenarioSpec spec = Base();
  VehicleScript v = Car(4, 3);
  // 4 s change centered on t = 30 s: frames 280..320.
  v.changes = {{280, 4.0, Direction::kLeft}};
  spec.vehicles = {v};
  const Scenario sc = generate(spec);
  ASSERT_EQ(sc.ground_truth.size(), 1u);
  const LaneChangeEvent& e = sc.ground_truth[0];
  EXPECT_EQ(e.direction, Direction::kLeft);
  // Equal-width lanes put the boundary at the profile midpoint (u = 0.5),
  // i.e. exactly frame 300; the sample on the boundary counts as crossed.
  EXPECT_EQ(e.cross_frame, 300);
  EXPECT_EQ(e.start_frame, 280);
  EXPECT_EQ(e.end_frame, 320);
  EXPECT_EQ(sc.sequence.at(4, 299).lane_id, 3);
  EXPECT_EQ(sc.sequence.at(4, 300).lane_id, 2);
}

TEST(Generate, OffCenterCrossingSolvedInClosedForm) {
  // Unequal lanes move the boundary away from the midpoint of the profile.
  ScenarioSpec spec = Base();
  spec.steepness = 4.0;
  VehicleScript v = Car(1, 1);
  v.changes = {{100, 3.3, Direction::kRight}};
  spec.vehicles = {v};
  const Scenario sc = generate(spec);
  ASSERT_EQ(sc.ground_truth.size(), 1u);
  const int frames = 33;
  int first_crossed = -1;
  for (int k = 0; k <= frames; ++k) {
    const double x = 1.85 + 3.7 * lateral_progress(double(k) / frames, 4.0);
    if (x >= 3.7) {
      first_crossed = 100 + k;
      break;
    }
  }
  EXPECT_EQ(sc.ground_truth[0].cross_frame, first_crossed);
}

TEST(Generate, DeterministicAndSeedSensitive) {
  ScenarioSpec spec = Base();
  VehicleScript v = Car(1, 2);
  v.changes = {{200, 4.0, Direction::kLeft}};
  spec.vehicles = {v, Car(2, 4, 30.0)};
  const Scenario a = generate(spec);
  const Scenario b = generate(spec);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  for (int id : {1, 2}) {
    const auto ta = a.sequence.trajectory(id);
    const auto tb = b.sequence.trajectory(id);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(ta[i], tb[i]);
  }
  spec.seed = 10;
  const Scenario c = generate(spec);
  EXPECT_NE(c.sequence.at(2, 5).local_x, a.sequence.at(2, 5).local_x);
}

TEST(Generate, AccelerationPhases) {
  ScenarioSpec spec = Base();
  spec.duration_s = 10.0;
  VehicleScript v = Car(1, 1, 20.0);
  v.accel_phases = {{10, 1.2}, {20, 0.0}};
  spec.vehicles = {v};
  const Scenario sc = generate(spec);
  EXPECT_EQ(sc.sequence.at(1, 15).acceleration, 1.2);
  EXPECT_NEAR(sc.sequence.at(1, 30).velocity, 21.2, 1e-9);
  EXPECT_EQ(sc.sequence.at(1, 30).acceleration, 0.0);
}

TEST(Generate, SpecErrors) {
  ScenarioSpec spec = Base();
  VehicleScript v = Car(1, 2);
  v.changes = {{100, 4.0, Direction::kLeft}, {120, 4.0, Direction::kRight}};
  spec.vehicles = {v};
  EXPECT_THROW(generate(spec), SpecError);

  v.changes = {{100, 4.0, Direction::kLeft}, {200, 4.0, Direction::kLeft}};
  spec.vehicles = {v};
  EXPECT_THROW(generate(spec), SpecError);  // off the road

  spec.vehicles = {Car(1, 5)};
  EXPECT_THROW(generate(spec), SpecError);
}

TEST(ScenarioFile, RoundTrip) {
  ScenarioSpec spec = Base();
  VehicleScript v = Car(3, 2);
  v.exit_frame = 500;
  v.initial_y = 12.5;
  v.changes = {{100, 4.0, Direction::kLeft}, {300, 3.5, Direction::kRight}};
  v.accel_phases = {{50, -0.5}};
  spec.vehicles = {v, Car(5, 1)};
  std::stringstream io;
  write_scenario(io, spec);
  const ScenarioSpec back = parse_scenario(io);
  std::stringstream again;
  write_scenario(again, back);
  EXPECT_EQ(io.str(), again.str());
  EXPECT_EQ(back.vehicles.size(), 2u);
  EXPECT_EQ(back.vehicles[0].changes.size(), 2u);
}

TEST(ScenarioFile, Errors) {
  std::istringstream unknown("seed = 1\nbogus = 2\n");
  EXPECT_THROW(parse_scenario(unknown), ConfigError);
  std::istringstream undeclared("change = vehicle=4 start=10 direction=left\n");
  EXPECT_THROW(parse_scenario(undeclared), ConfigError);
}

TEST(RandomScenario, ValidDeterministicAndHasBothDirections) {
  RandomScenarioOptions opt;
  opt.seed = 5;
  opt.duration_s = 120.0;
  const ScenarioSpec a = random_scenario(opt);
  EXPECT_NO_THROW(a.validate());
  const Scenario sa = generate(a);
  const Scenario sb = generate(random_scenario(opt));
  EXPECT_EQ(sa.ground_truth, sb.ground_truth);
  int left = 0, right = 0;
  for (const auto& e : sa.ground_truth) {
    (e.direction == Direction::kLeft ? left : right)++;
  }
  EXPECT_GT(left, 0);
  EXPECT_GT(right, 0);
}

}  // namespace
}  // namespace lcp
