#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "uwbcoop/errors.hpp"
#include "uwbcoop/metrics.hpp"

using namespace uwbcoop;

namespace {

FlightRecord synthetic_record(const Trajectory& traj) {
  FlightRecord rec;
  rec.trajectory = traj;
  rec.dt = 0.1;
  for (const auto& sp : generate_setpoints(traj, rec.dt)) {
    FlightSample s;
    s.t = sp.t;
    s.setpoint = sp.position;
    s.true_pose = Pose(sp.position, 0.0);
    s.estimate = sp.position;
    rec.samples.push_back(s);
  }
  return rec;
}

}  // namespace

TEST(PositioningErrors, ZeroWhenExact) {
  const auto series = positioning_errors(synthetic_record(Trajectory::vertical(10.0)));
  for (const auto& e : series.samples) {
    EXPECT_EQ(e.xy, 0.0);
    EXPECT_EQ(e.z.value(), 0.0);
  }
}

TEST(PositioningErrors, ThreeFourFive) {
  auto rec = synthetic_record(Trajectory::vertical(10.0));
  for (auto& s : rec.samples) s.estimate = s.true_pose.position + Vec3(0.3, 0.4, 0.1);
  const auto series = positioning_errors(rec);
  EXPECT_EQ(series.samples.size(), rec.samples.size());
  for (const auto& e : series.samples) {
    EXPECT_NEAR(e.xy, 0.5, 1e-12);
    EXPECT_NEAR(*e.z, 0.1, 1e-12);
  }
}

TEST(NavigationErrors, VerticalCircle) {
  auto rec = synthetic_record(Trajectory::vertical(10.0));
  const double r = 0.37;
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    const double a = 0.1 * static_cast<double>(k);
    rec.samples[k].true_pose.position += Vec3(r * std::cos(a), r * std::sin(a), 0.0);
  }
  const auto nav = navigation_errors(rec);
  EXPECT_EQ(nav.samples.size(), rec.samples.size());
  for (const auto& e : nav.samples) {
    EXPECT_NEAR(e.xy, r, 1e-12);
    EXPECT_FALSE(e.z.has_value());
  }
}

TEST(NavigationErrors, SquareDropsClimbAndZ) {
  const auto traj = Trajectory::square(8.0, 10.0);
  const auto rec = synthetic_record(traj);
  const auto nav = navigation_errors(rec);
  ASSERT_FALSE(nav.samples.empty());
  EXPECT_GE(nav.samples.front().t, cruise_start_time(traj) - 1e-9);
  EXPECT_TRUE(nav.z().empty());
  for (const auto& e : nav.samples) EXPECT_LT(e.xy, 1e-12);
}

TEST(NavigationErrors, PolylineDistance) {
  const auto path = cruise_path(Trajectory::square(8.0, 5.0));
  EXPECT_NEAR(planar_distance_to_polyline(Vec3(0, 0, 99), path), 4.0, 1e-12);
  EXPECT_NEAR(planar_distance_to_polyline(Vec3(5, 5, 0), path), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(planar_distance_to_polyline(Vec3(0, -4.25, 5), path), 0.25, 1e-12);
}

TEST(BoxStats, OneToHundred) {
  std::vector<double> v(100);
  for (int k = 0; k < 100; ++k) v[k] = k + 1;
  const auto b = box_stats(v);
  EXPECT_DOUBLE_EQ(b.median, 50.5);
  EXPECT_DOUBLE_EQ(b.q1, 25.75);
  EXPECT_DOUBLE_EQ(b.q3, 75.25);
  EXPECT_DOUBLE_EQ(b.whisker_low, 1.0);
  EXPECT_DOUBLE_EQ(b.whisker_high, 100.0);
  EXPECT_EQ(b.count, 100u);
}

TEST(BoxStats, ConstantSeries) {
  const std::vector<double> v(17, 2.5);
  const auto b = box_stats(v);
  for (double x : {b.median, b.q1, b.q3, b.whisker_low, b.whisker_high, b.mean, b.min, b.max}) {
    EXPECT_DOUBLE_EQ(x, 2.5);
  }
  EXPECT_EQ(b.iqr(), 0.0);
}

TEST(BoxStats, WhiskersStopAtOutliers) {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 100};
  const auto b = box_stats(v);
  EXPECT_DOUBLE_EQ(b.whisker_high, 8.0);
  EXPECT_DOUBLE_EQ(b.max, 100.0);
}

TEST(BoxStats, FractionAbove) {
  const std::vector<double> v{0.5, 1.5};
  EXPECT_DOUBLE_EQ(box_stats(v).fraction_above(1.0), 0.5);
  const std::vector<double> edge{1.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(box_stats(edge).fraction_above(1.0), 1.0 / 3.0);
}

TEST(BoxStats, PermutationInvariant) {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> d(2.0);
  std::vector<double> v(501);
  for (auto& x : v) x = d(gen);
  const auto a = box_stats(v);
  std::shuffle(v.begin(), v.end(), gen);
  const auto b = box_stats(v);
  EXPECT_EQ(a.median, b.median);
  EXPECT_EQ(a.q1, b.q1);
  EXPECT_EQ(a.q3, b.q3);
  EXPECT_EQ(a.whisker_low, b.whisker_low);
  EXPECT_EQ(a.whisker_high, b.whisker_high);
  EXPECT_EQ(a.fraction_above(0.5), b.fraction_above(0.5));
}

TEST(BoxStats, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(box_stats(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(box_stats(std::vector<double>{1.0, NAN}), InvalidArgument);
}

TEST(Metrics, ErrorsAreNonNegativeOnSimulatedFlight) {
  const TransceiverLayout layout{default_initiators(1), square_anchor_layout(0.6)};
  const auto rec = run_flight(Trajectory::square(8.0, 10.0), layout, NoiseModel{0.10, 4},
                              FeedbackSource::uwb);
  for (const auto& s : {positioning_errors(rec), navigation_errors(rec)}) {
    for (const auto& e : s.samples) {
      EXPECT_GE(e.xy, 0.0);
      if (e.z) EXPECT_GE(*e.z, 0.0);
    }
  }
}

TEST(Metrics, SmallLayoutSpreadsWiderThanLarge) {
  auto nav_iqr = [](double sep) {
    const TransceiverLayout layout{default_initiators(1), square_anchor_layout(sep)};
    const auto rec =
        run_flight(Trajectory::vertical(30.0), layout, NoiseModel{0.10, 9}, FeedbackSource::uwb);
    return box_stats(navigation_errors(rec).xy());
  };
  const auto small = nav_iqr(0.6);
  const auto large = nav_iqr(16.0);
  EXPECT_GT(small.q3, large.q3);
  EXPECT_GT(small.median, large.median);
}
