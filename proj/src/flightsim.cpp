#include "uwbcoop/flightsim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "uwbcoop/csv.hpp"
#include "uwbcoop/errors.hpp"

namespace uwbcoop {

Trajectory Trajectory::vertical(double target_altitude, double speed) {
  Trajectory t;
  t.kind = TrajectoryKind::vertical;
  t.target_altitude = target_altitude;
  t.speed = speed;
  return t;
}

Trajectory Trajectory::square(double side, double altitude, double speed, double dwell) {
  Trajectory t;
  t.kind = TrajectoryKind::square;
  t.side = side;
  t.altitude = altitude;
  t.speed = speed;
  t.dwell = dwell;
  return t;
}

void Trajectory::validate() const {
  if (!(speed > 0.0)) throw InvalidArgument("trajectory speed must be positive");
  if (kind == TrajectoryKind::vertical) {
    if (!(target_altitude > 0.0)) throw InvalidArgument("target altitude must be positive");
  } else {
    if (!(side > 0.0)) throw InvalidArgument("square side must be positive");
    if (!(altitude > 0.0)) throw InvalidArgument("square altitude must be positive");
    if (!(dwell >= 0.0)) throw InvalidArgument("dwell must be non-negative");
  }
}

std::string Trajectory::name() const {
  std::ostringstream os;
  if (kind == TrajectoryKind::vertical) {
    os << "vertical" << csv::format(target_altitude);
  } else {
    os << "square" << csv::format(side) << "_alt" << csv::format(altitude);
  }
  return os.str();
}

std::string to_string(FeedbackSource f) { return f == FeedbackSource::truth ? "truth" : "uwb"; }
std::string to_string(TrajectoryKind k) {
  return k == TrajectoryKind::vertical ? "vertical" : "square";
}

namespace {

struct Knot {
  double t;
  Vec3 p;
};

// Reference as time-stamped knots; consecutive equal positions encode a dwell.
std::vector<Knot> knots(const Trajectory& traj) {
  traj.validate();
  std::vector<Knot> out;
  auto go = [&](const Vec3& p) {
    const double dist = (p - out.back().p).norm();
    out.push_back({out.back().t + dist / traj.speed, p});
  };
  auto hold = [&](double seconds) {
    if (seconds > 0.0) out.push_back({out.back().t + seconds, out.back().p});
  };
  if (traj.kind == TrajectoryKind::vertical) {
    out.push_back({0.0, Vec3::Zero()});
    go(Vec3(0.0, 0.0, traj.target_altitude));
    return out;
  }
  const auto corners = cruise_path(traj);
  out.push_back({0.0, Vec3(corners[0].x(), corners[0].y(), 0.0)});
  go(corners[0]);
  for (std::size_t c = 1; c < corners.size(); ++c) {
    hold(traj.dwell);
    go(corners[c]);
  }
  hold(traj.dwell);
  return out;
}

Vec3 interpolate(const std::vector<Knot>& ks, double t) {
  if (t <= ks.front().t) return ks.front().p;
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (t <= ks[i].t) {
      const double span = ks[i].t - ks[i - 1].t;
      if (span <= 0.0) return ks[i].p;
      const double a = (t - ks[i - 1].t) / span;
      return ks[i - 1].p + a * (ks[i].p - ks[i - 1].p);
    }
  }
  return ks.back().p;
}

}  // namespace

std::vector<Vec3> cruise_path(const Trajectory& traj) {
  if (traj.kind != TrajectoryKind::square) return {};
  const double h = 0.5 * traj.side;
  const double z = traj.altitude;
  return {Vec3(-h, -h, z), Vec3(h, -h, z), Vec3(h, h, z), Vec3(-h, h, z), Vec3(-h, -h, z)};
}

double cruise_start_time(const Trajectory& traj) {
  if (traj.kind != TrajectoryKind::square) return 0.0;
  return traj.altitude / traj.speed;
}

std::vector<Setpoint> generate_setpoints(const Trajectory& traj, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const auto ks = knots(traj);
  const double end = ks.back().t;
  // Tolerate rounding so that an end time that is a multiple of dt is sampled.
  const auto count = static_cast<std::size_t>(std::floor(end / dt + 1e-9)) + 1;
  std::vector<Setpoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) * dt;
    out.push_back({t, interpolate(ks, t)});
  }
  return out;
}

UavState step_plant(const UavState& state, const Vec3& velocity_command, double dt,
                    const PlantConfig& plant) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  Vec3 cmd = velocity_command;
  const double mag = cmd.norm();
  if (mag > plant.max_speed) cmd *= plant.max_speed / mag;
  const double alpha = std::min(1.0, dt / plant.tau);
  UavState next = state;
  next.velocity = state.velocity + (cmd - state.velocity) * alpha;
  next.pose.position = state.pose.position + next.velocity * dt;
  if (next.pose.position.z() < plant.ground_z) {
    next.pose.position.z() = plant.ground_z;
    next.velocity.z() = std::max(next.velocity.z(), 0.0);
  }
  return next;
}

void FlightConfig::validate() const {
  if (!(plant.tau > 0.0) || !(plant.max_speed > 0.0)) {
    throw InvalidArgument("plant tau and max speed must be positive");
  }
  if (!(controller.kp > 0.0) || !(controller.rate_hz > 0.0)) {
    throw InvalidArgument("controller gain and rate must be positive");
  }
  if (!(init_lift >= 0.0)) throw InvalidArgument("init_lift must be non-negative");
  if (max_consecutive_failures < 0) {
    throw InvalidArgument("max_consecutive_failures must be non-negative");
  }
  solver.validate();
}

bool FlightRecord::has_estimates() const {
  return !samples.empty() &&
         std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.estimate; });
}

FlightRecord run_flight(const Trajectory& traj, const TransceiverLayout& layout,
                        const NoiseModel& noise, FeedbackSource feedback,
                        const FlightConfig& config) {
  traj.validate();
  layout.validate();
  noise.validate();
  config.validate();

  FlightRecord rec;
  rec.trajectory = traj;
  rec.layout = layout;
  rec.noise = noise;
  rec.feedback = feedback;
  rec.config = config;
  rec.dt = 1.0 / config.controller.rate_hz;

  const auto setpoints = generate_setpoints(traj, rec.dt);
  rec.samples.reserve(setpoints.size());
  const bool estimate = feedback == FeedbackSource::uwb || config.estimate_in_truth_runs;
  const bool hold_true_altitude = traj.kind == TrajectoryKind::square;

  UavState state;
  state.pose = Pose(setpoints.front().position, 0.0);
  Rng rng = make_rng(noise.seed);
  SweepPositioner positioner(layout, config.solver, config.init_lift);
  int failures = 0;

  for (const auto& sp : setpoints) {
    FlightSample sample;
    sample.t = sp.t;
    sample.true_pose = state.pose;
    sample.setpoint = sp.position;

    if (estimate) {
      const auto ranges = sweep(layout, state.pose, noise, sp.t, rng);
      rec.ranges.insert(rec.ranges.end(), ranges.begin(), ranges.end());
      const auto est = positioner.update(ranges, state.pose.yaw);
      sample.estimate = est.position;
      failures = est.converged ? 0 : failures + 1;
      if (failures > config.max_consecutive_failures) {
        std::ostringstream os;
        os << "estimator failed to converge on " << failures << " consecutive sweeps at t="
           << sp.t;
        throw EstimatorDivergenceError(os.str(), sp.t);
      }
    }

    Vec3 fb = state.pose.position;
    if (feedback == FeedbackSource::uwb) {
      fb = *sample.estimate;
      if (hold_true_altitude) fb.z() = state.pose.position.z();
    }
    const Vec3 cmd = config.controller.kp * (sp.position - fb);
    rec.samples.push_back(sample);
    state = step_plant(state, cmd, rec.dt, config.plant);
  }
  return rec;
}

void write_flight_csv(std::ostream& out, const FlightRecord& record) {
  out << "t,true_x,true_y,true_z,yaw,est_x,est_y,est_z,sp_x,sp_y,sp_z\n";
  for (const auto& s : record.samples) {
    const auto& p = s.true_pose.position;
    out << csv::format(s.t) << ',' << csv::format(p.x()) << ',' << csv::format(p.y()) << ','
        << csv::format(p.z()) << ',' << csv::format(s.true_pose.yaw) << ',';
    if (s.estimate) {
      out << csv::format(s.estimate->x()) << ',' << csv::format(s.estimate->y()) << ','
          << csv::format(s.estimate->z()) << ',';
    } else {
      out << ",,,";
    }
    out << csv::format(s.setpoint.x()) << ',' << csv::format(s.setpoint.y()) << ','
        << csv::format(s.setpoint.z()) << '\n';
  }
}

}  // namespace uwbcoop
