#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uwbcoop/estimator.hpp"
#include "uwbcoop/geometry.hpp"
#include "uwbcoop/ranging.hpp"

namespace uwbcoop {

enum class TrajectoryKind { vertical, square };

/// Reference flight.
///
/// vertical: climb from (0, 0, 0) straight up to `target_altitude`.
/// square: climb at the first corner to `altitude`, then visit the corners of
/// the `side` x `side` square centered on the origin counter-clockwise and
/// return to the first one, holding `dwell` seconds at every corner.
struct Trajectory {
  TrajectoryKind kind{TrajectoryKind::vertical};
  double target_altitude{30.0};
  double side{8.0};
  double altitude{5.0};
  double speed{1.0};
  double dwell{5.0};

  static Trajectory vertical(double target_altitude, double speed = 1.0);
  static Trajectory square(double side, double altitude, double speed = 1.0, double dwell = 5.0);

  void validate() const;
  /// Short stable label such as "vertical30" or "square8_alt10".
  std::string name() const;
};

struct Setpoint {
  double t{0.0};
  Vec3 position{Vec3::Zero()};
};

/// Samples the reference at t = 0, dt, 2 dt, ... up to the end of the flight.
std::vector<Setpoint> generate_setpoints(const Trajectory& traj, double dt);

/// Time at which the square reaches cruise altitude (its first dwell); zero for
/// vertical flights.
double cruise_start_time(const Trajectory& traj);

/// Closed cruise polyline for square flights (5 points, first == last).
std::vector<Vec3> cruise_path(const Trajectory& traj);

struct UavState {
  Pose pose;
  Vec3 velocity{Vec3::Zero()};
};

struct PlantConfig {
  double tau{0.3};        // velocity time constant, s
  double max_speed{2.0};  // m/s
  double ground_z{0.0};   // the vehicle rests on this plane instead of sinking
};

/// First-order velocity tracking with the command clamped to max_speed.
UavState step_plant(const UavState& state, const Vec3& velocity_command, double dt,
                    const PlantConfig& plant = {});

struct ControllerConfig {
  double kp{1.0};        // 1/s
  double rate_hz{10.0};  // control ticks per second; one ranging sweep per tick
};

enum class FeedbackSource { truth, uwb };

std::string to_string(FeedbackSource f);
std::string to_string(TrajectoryKind k);

struct FlightConfig {
  PlantConfig plant;
  ControllerConfig controller;
  SolverConfig solver;
  double init_lift{1.0};
  /// Also solve positions on truth-feedback flights (positioning error).
  bool estimate_in_truth_runs{true};
  int max_consecutive_failures{10};

  void validate() const;
};

struct FlightSample {
  double t{0.0};
  Pose true_pose;
  std::optional<Vec3> estimate;
  Vec3 setpoint{Vec3::Zero()};
};

struct FlightRecord {
  Trajectory trajectory;
  TransceiverLayout layout;
  NoiseModel noise;
  FeedbackSource feedback{FeedbackSource::truth};
  FlightConfig config;
  double dt{0.1};
  std::vector<FlightSample> samples;
  std::vector<RangeMeasurement> ranges;

  bool has_estimates() const;
};

/// Closed-loop flight: each tick ranges against the true pose, solves, feeds
/// back truth or the estimate to a proportional velocity controller, records,
/// then advances the plant. On square flights the height channel always uses
/// the true altitude. Throws EstimatorDivergenceError after more than
/// `max_consecutive_failures` non-converged solves in a row.
FlightRecord run_flight(const Trajectory& traj, const TransceiverLayout& layout,
                        const NoiseModel& noise, FeedbackSource feedback,
                        const FlightConfig& config = {});

/// Columns t,true_x,true_y,true_z,yaw,est_x,est_y,est_z,sp_x,sp_y,sp_z. Missing
/// estimates are empty fields.
void write_flight_csv(std::ostream& out, const FlightRecord& record);

}  // namespace uwbcoop
