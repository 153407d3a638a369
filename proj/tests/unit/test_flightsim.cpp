#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "uwbcoop/errors.hpp"
#include "uwbcoop/flightsim.hpp"
#include "uwbcoop/metrics.hpp"

using namespace uwbcoop;

namespace {

const Setpoint& at_time(const std::vector<Setpoint>& sps, double t) {
  for (const auto& s : sps) {
    if (std::abs(s.t - t) < 1e-9) return s;
  }
  throw std::runtime_error("no setpoint at requested time");
}

std::string to_csv(const FlightRecord& r) {
  std::ostringstream os;
  write_flight_csv(os, r);
  return os.str();
}

}  // namespace

TEST(Setpoints, VerticalClimb) {
  const auto sps = generate_setpoints(Trajectory::vertical(30.0), 0.1);
  EXPECT_EQ(sps.front().t, 0.0);
  EXPECT_TRUE(sps.front().position.isZero());
  EXPECT_LT((at_time(sps, 15.0).position - Vec3(0, 0, 15)).norm(), 1e-12);
  EXPECT_NEAR(sps.back().t, 30.0, 1e-9);
  EXPECT_LT((sps.back().position - Vec3(0, 0, 30)).norm(), 1e-12);
}

TEST(Setpoints, SquareVisitsCornersInOrder) {
  const auto traj = Trajectory::square(8.0, 5.0);
  const auto sps = generate_setpoints(traj, 0.1);
  const std::vector<Vec3> corners{{-4, -4, 5}, {4, -4, 5}, {4, 4, 5}, {-4, 4, 5}, {-4, -4, 5}};
  std::size_t next = 0;
  for (const auto& s : sps) {
    if (next < corners.size() && (s.position - corners[next]).norm() < 1e-9) ++next;
  }
  EXPECT_EQ(next, corners.size());
  EXPECT_EQ(sps.front().position, Vec3(-4, -4, 0));
  EXPECT_LT((sps.back().position - corners.back()).norm(), 1e-9);
  EXPECT_NEAR(cruise_start_time(traj), 5.0, 1e-12);
  const auto path = cruise_path(traj);
  ASSERT_EQ(path.size(), 5u);
  EXPECT_EQ(path.front(), path.back());
}

TEST(Setpoints, ConstantSpeedBetweenSamples) {
  const auto sps = generate_setpoints(Trajectory::square(8.0, 10.0), 0.1);
  for (std::size_t k = 1; k < sps.size(); ++k) {
    EXPECT_LE((sps[k].position - sps[k - 1].position).norm(), 0.1 + 1e-9);
  }
}

TEST(Plant, ZeroCommandAtRest) {
  UavState s;
  s.pose.position = Vec3(1, 2, 3);
  const auto next = step_plant(s, Vec3::Zero(), 0.1);
  EXPECT_EQ(next.pose.position, s.pose.position);
  EXPECT_TRUE(next.velocity.isZero());
}

TEST(Plant, FirstOrderResponse) {
  UavState s;
  for (int k = 0; k < 50; ++k) s = step_plant(s, Vec3(0, 0, 1), 0.1);
  EXPECT_NEAR(s.velocity.z(), 1.0, 0.01);
}

TEST(Plant, ClampsCommand) {
  PlantConfig plant;
  plant.tau = 0.01;  // alpha = 1: velocity equals the applied command
  const auto next = step_plant(UavState{}, Vec3(10, 0, 0), 0.1, plant);
  EXPECT_NEAR(next.velocity.norm(), 2.0, 1e-12);
}

TEST(Plant, RejectsNonPositiveDt) {
  EXPECT_THROW(step_plant(UavState{}, Vec3::Zero(), 0.0), InvalidArgument);
}

TEST(RunFlight, TruthFeedbackFollowsPath) {
  const TransceiverLayout layout{default_initiators(1), square_anchor_layout(0.6)};
  for (const auto& traj : {Trajectory::vertical(30.0), Trajectory::square(8.0, 5.0),
                           Trajectory::square(8.0, 20.0)}) {
    const auto rec = run_flight(traj, layout, NoiseModel{0.10, 3}, FeedbackSource::truth);
    const auto nav = navigation_errors(rec);
    for (double e : nav.xy()) EXPECT_LT(e, 0.05) << traj.name();
  }
}

TEST(RunFlight, SameSeedIsBitIdentical) {
  const TransceiverLayout layout{default_initiators(1), square_anchor_layout(1.2)};
  const auto a = run_flight(Trajectory::square(8.0, 10.0), layout, NoiseModel{0.10, 7},
                            FeedbackSource::uwb);
  const auto b = run_flight(Trajectory::square(8.0, 10.0), layout, NoiseModel{0.10, 7},
                            FeedbackSource::uwb);
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(a.ranges, b.ranges);
  const auto c = run_flight(Trajectory::square(8.0, 10.0), layout, NoiseModel{0.10, 8},
                            FeedbackSource::uwb);
  EXPECT_NE(to_csv(a), to_csv(c));
}

TEST(RunFlight, RecordShape) {
  const TransceiverLayout layout{default_initiators(1), square_anchor_layout(12.0)};
  const auto traj = Trajectory::vertical(30.0);
  const auto rec = run_flight(traj, layout, NoiseModel{0.10, 1}, FeedbackSource::uwb);
  EXPECT_EQ(rec.samples.size(), generate_setpoints(traj, 0.1).size());
  EXPECT_EQ(rec.ranges.size(), rec.samples.size() * 4);
  EXPECT_TRUE(rec.has_estimates());
  for (const auto& s : rec.samples) EXPECT_GE(s.true_pose.position.z(), 0.0);
}

TEST(RunFlight, EstimationCanBeDisabledOnTruthRuns) {
  const TransceiverLayout layout{default_initiators(1), square_anchor_layout(4.0)};
  FlightConfig cfg;
  cfg.estimate_in_truth_runs = false;
  const auto rec =
      run_flight(Trajectory::vertical(5.0), layout, NoiseModel{}, FeedbackSource::truth, cfg);
  EXPECT_FALSE(rec.has_estimates());
  EXPECT_THROW(positioning_errors(rec), InvalidArgument);
}
