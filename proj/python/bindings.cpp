#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "uwbcoop/errors.hpp"
#include "uwbcoop/estimator.hpp"
#include "uwbcoop/flightsim.hpp"
#include "uwbcoop/geometry.hpp"
#include "uwbcoop/groundtruth.hpp"
#include "uwbcoop/metrics.hpp"
#include "uwbcoop/ranging.hpp"

namespace py = pybind11;
using namespace uwbcoop;

namespace {

using RowMatrix3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

RowMatrix3 stack(const std::vector<Vec3>& pts) {
  RowMatrix3 m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i];
  return m;
}

std::vector<Vec3> unstack(const RowMatrix3& m) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict series_dict(const ErrorSeries& s) {
  std::vector<double> t;
  std::vector<double> z;
  for (const auto& e : s.samples) {
    t.push_back(e.t);
    z.push_back(e.z.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
  py::dict d;
  d["kind"] = to_string(s.kind);
  d["t"] = to_array(t);
  d["xy"] = to_array(s.xy());
  d["z"] = to_array(z);
  return d;
}

}  // namespace

PYBIND11_MODULE(_uwbcoop, m) {
  m.doc() = "Cooperative UWB localization: ranging simulation, least-squares estimators, "
            "closed-loop flight simulation and point-cloud tracking.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<UnderdeterminedError>(m, "UnderdeterminedError", base.ptr());
  py::register_exception<DegenerateGeometryError>(m, "DegenerateGeometryError", base.ptr());
  py::register_exception<YawUnobservableError>(m, "YawUnobservableError", base.ptr());
  py::register_exception<EstimatorDivergenceError>(m, "EstimatorDivergenceError", base.ptr());
  py::register_exception<TrackLostError>(m, "TrackLostError", base.ptr());

  // geometry
  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init<const Vec3&, double>(), py::arg("position"), py::arg("yaw") = 0.0)
      .def_readwrite("position", &Pose::position)
      .def_readwrite("yaw", &Pose::yaw)
      .def("__repr__", [](const Pose& p) {
        return "Pose(position=[" + std::to_string(p.position.x()) + ", " +
               std::to_string(p.position.y()) + ", " + std::to_string(p.position.z()) +
               "], yaw=" + std::to_string(p.yaw) + ")";
      });

  py::class_<TransceiverLayout>(m, "TransceiverLayout")
      .def(py::init([](const RowMatrix3& initiators, const RowMatrix3& responders) {
             TransceiverLayout l;
             for (const auto& o : unstack(initiators)) l.initiators.emplace_back(o);
             l.responders = unstack(responders);
             l.validate();
             return l;
           }),
           py::arg("initiators"), py::arg("responders"))
      .def_property_readonly("initiators",
                             [](const TransceiverLayout& l) {
                               std::vector<Vec3> o;
                               for (const auto& r : l.initiators) o.push_back(r.body_offset);
                               return stack(o);
                             })
      .def_property_readonly("responders",
                             [](const TransceiverLayout& l) { return stack(l.responders); });

  m.def(
      "apply_pose",
      [](const Pose& pose, const Vec3& offset) { return apply_pose(pose, RigidOffset(offset)); },
      py::arg("pose"), py::arg("offset"), "World position of a body-frame offset.");
  m.def(
      "square_anchor_layout",
      [](double sep, double height) { return stack(square_anchor_layout(sep, height)); },
      py::arg("separation"), py::arg("height") = 0.0);
  m.def("normalize_angle", &normalize_angle);

  // ranging
  py::class_<RangeMeasurement>(m, "RangeMeasurement")
      .def(py::init<>())
      .def(py::init([](std::size_t i, std::size_t j, double range, double t) {
             return RangeMeasurement{i, j, range, t};
           }),
           py::arg("initiator_id"), py::arg("responder_id"), py::arg("range"),
           py::arg("timestamp") = 0.0)
      .def_readwrite("initiator_id", &RangeMeasurement::initiator_id)
      .def_readwrite("responder_id", &RangeMeasurement::responder_id)
      .def_readwrite("range", &RangeMeasurement::range)
      .def_readwrite("timestamp", &RangeMeasurement::timestamp);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init([](double sigma, std::uint64_t seed) { return NoiseModel{sigma, seed}; }),
           py::arg("sigma") = 0.10, py::arg("seed") = 0)
      .def_readwrite("sigma", &NoiseModel::sigma)
      .def_readwrite("seed", &NoiseModel::seed)
      .def_readwrite("outlier_probability", &NoiseModel::outlier_probability)
      .def_readwrite("outlier_sigma", &NoiseModel::outlier_sigma);

  py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>(), py::arg("seed"));
  m.def("measure_range", &measure_range, py::arg("initiator"), py::arg("responder"),
        py::arg("noise"), py::arg("rng"));
  m.def("sweep", &sweep, py::arg("layout"), py::arg("pose"), py::arg("noise"), py::arg("t"),
        py::arg("rng"));

  // estimator
  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("gradient_tolerance", &SolverConfig::gradient_tolerance)
      .def_readwrite("step_tolerance", &SolverConfig::step_tolerance)
      .def_readwrite("damping_init", &SolverConfig::damping_init)
      .def_readwrite("z_floor", &SolverConfig::z_floor);

  py::class_<PositionEstimate>(m, "PositionEstimate")
      .def_readonly("position", &PositionEstimate::position)
      .def_readonly("residual_rms", &PositionEstimate::residual_rms)
      .def_readonly("iterations", &PositionEstimate::iterations)
      .def_readonly("converged", &PositionEstimate::converged);

  py::class_<PoseEstimate>(m, "PoseEstimate")
      .def_readonly("pose", &PoseEstimate::pose)
      .def_readonly("residual_rms", &PoseEstimate::residual_rms)
      .def_readonly("iterations", &PoseEstimate::iterations)
      .def_readonly("converged", &PoseEstimate::converged);

  m.def(
      "solve_position",
      [](const std::vector<RangeMeasurement>& ms, const RowMatrix3& responders, const Vec3& guess,
         const SolverConfig& cfg) { return solve_position(ms, unstack(responders), guess, cfg); },
      py::arg("measurements"), py::arg("responders"), py::arg("initial_guess"),
      py::arg("config") = SolverConfig{});
  m.def(
      "solve_pose",
      [](const std::vector<RangeMeasurement>& ms, const TransceiverLayout& layout,
         const Pose& guess, const SolverConfig& cfg) { return solve_pose(ms, layout, guess, cfg); },
      py::arg("measurements"), py::arg("layout"), py::arg("initial_guess"),
      py::arg("config") = SolverConfig{});
  m.def(
      "oracle_position",
      [](const std::vector<RangeMeasurement>& ms, const RowMatrix3& responders,
         const Vec3& center, double half_width, double resolution) {
        return oracle_position(ms, unstack(responders), center, half_width, resolution);
      },
      py::arg("measurements"), py::arg("responders"), py::arg("search_center"),
      py::arg("search_half_width"), py::arg("resolution") = 0.01);

  // flightsim
  py::enum_<FeedbackSource>(m, "FeedbackSource")
      .value("truth", FeedbackSource::truth)
      .value("uwb", FeedbackSource::uwb);

  py::class_<Trajectory>(m, "Trajectory")
      .def_static("vertical", &Trajectory::vertical, py::arg("target_altitude"),
                  py::arg("speed") = 1.0)
      .def_static("square", &Trajectory::square, py::arg("side"), py::arg("altitude"),
                  py::arg("speed") = 1.0, py::arg("dwell") = 5.0)
      .def_property_readonly("name", &Trajectory::name);

  m.def(
      "generate_setpoints",
      [](const Trajectory& traj, double dt) {
        const auto sps = generate_setpoints(traj, dt);
        std::vector<double> t;
        std::vector<Vec3> p;
        for (const auto& s : sps) {
          t.push_back(s.t);
          p.push_back(s.position);
        }
        return py::make_tuple(to_array(t), stack(p));
      },
      py::arg("trajectory"), py::arg("dt"));

  py::class_<FlightConfig>(m, "FlightConfig")
      .def(py::init<>())
      .def_readwrite("solver", &FlightConfig::solver)
      .def_readwrite("init_lift", &FlightConfig::init_lift)
      .def_readwrite("estimate_in_truth_runs", &FlightConfig::estimate_in_truth_runs)
      .def_property(
          "kp", [](const FlightConfig& c) { return c.controller.kp; },
          [](FlightConfig& c, double v) { c.controller.kp = v; })
      .def_property(
          "rate_hz", [](const FlightConfig& c) { return c.controller.rate_hz; },
          [](FlightConfig& c, double v) { c.controller.rate_hz = v; })
      .def_property(
          "max_speed", [](const FlightConfig& c) { return c.plant.max_speed; },
          [](FlightConfig& c, double v) { c.plant.max_speed = v; })
      .def_property(
          "tau", [](const FlightConfig& c) { return c.plant.tau; },
          [](FlightConfig& c, double v) { c.plant.tau = v; });

  py::class_<FlightRecord>(m, "FlightRecord")
      .def_property_readonly("t",
                             [](const FlightRecord& r) {
                               Eigen::VectorXd t(static_cast<Eigen::Index>(r.samples.size()));
                               for (std::size_t i = 0; i < r.samples.size(); ++i) {
                                 t(static_cast<Eigen::Index>(i)) = r.samples[i].t;
                               }
                               return t;
                             })
      .def_property_readonly("true_position",
                             [](const FlightRecord& r) {
                               std::vector<Vec3> p;
                               for (const auto& s : r.samples) p.push_back(s.true_pose.position);
                               return stack(p);
                             })
      .def_property_readonly(
          "estimate",
          [](const FlightRecord& r) {
            std::vector<Vec3> p;
            for (const auto& s : r.samples) {
              p.push_back(s.estimate.value_or(Vec3::Constant(std::numeric_limits<double>::quiet_NaN())));
            }
            return stack(p);
          })
      .def_property_readonly("setpoint",
                             [](const FlightRecord& r) {
                               std::vector<Vec3> p;
                               for (const auto& s : r.samples) p.push_back(s.setpoint);
                               return stack(p);
                             })
      .def_property_readonly("ranges", [](const FlightRecord& r) { return r.ranges; })
      .def("__len__", [](const FlightRecord& r) { return r.samples.size(); });

  m.def("run_flight", &run_flight, py::arg("trajectory"), py::arg("layout"), py::arg("noise"),
        py::arg("feedback"), py::arg("config") = FlightConfig{});

  // metrics
  m.def(
      "positioning_errors", [](const FlightRecord& r) { return series_dict(positioning_errors(r)); },
      py::arg("record"));
  m.def(
      "navigation_errors", [](const FlightRecord& r) { return series_dict(navigation_errors(r)); },
      py::arg("record"));

  py::class_<BoxStats>(m, "BoxStats")
      .def_readonly("median", &BoxStats::median)
      .def_readonly("q1", &BoxStats::q1)
      .def_readonly("q3", &BoxStats::q3)
      .def_readonly("whisker_low", &BoxStats::whisker_low)
      .def_readonly("whisker_high", &BoxStats::whisker_high)
      .def_readonly("mean", &BoxStats::mean)
      .def_readonly("min", &BoxStats::min)
      .def_readonly("max", &BoxStats::max)
      .def_readonly("count", &BoxStats::count)
      .def("fraction_above", &BoxStats::fraction_above, py::arg("threshold"));
  m.def(
      "box_stats", [](const std::vector<double>& v) { return box_stats(v); }, py::arg("values"));

  // groundtruth
  py::class_<TrackState>(m, "TrackState")
      .def(py::init([](const Vec3& p, const Vec3& v) { return TrackState{p, v}; }),
           py::arg("position"), py::arg("velocity") = Vec3::Zero())
      .def_readwrite("position", &TrackState::position)
      .def_readwrite("velocity", &TrackState::velocity);

  py::class_<PointCloudFrame>(m, "PointCloudFrame")
      .def(py::init([](const RowMatrix3& pts, double t) { return PointCloudFrame{unstack(pts), t}; }),
           py::arg("points"), py::arg("frame_time") = 0.0)
      .def_property_readonly("points", [](const PointCloudFrame& f) { return stack(f.points); })
      .def_readwrite("frame_time", &PointCloudFrame::frame_time);

  m.def(
      "track_step",
      [](const PointCloudFrame& frame, const TrackState& prev, double frame_rate,
         std::size_t k_neighbors, double max_radius) {
        return track_step(frame, prev, TrackerConfig{frame_rate, k_neighbors, max_radius});
      },
      py::arg("frame"), py::arg("prev"), py::arg("frame_rate") = 10.0,
      py::arg("k_neighbors") = 30, py::arg("max_radius") = 1.0);
  m.def(
      "synth_cloud",
      [](const Vec3& uav, std::size_t n, double spread, std::size_t clutter, const Vec3& lo,
         const Vec3& hi, Rng& rng, double exclusion_radius) {
        return synth_cloud(uav, n, spread, clutter, Bounds{lo, hi}, rng, exclusion_radius);
      },
      py::arg("uav_position"), py::arg("n_points"), py::arg("spread"), py::arg("clutter"),
      py::arg("bounds_lo"), py::arg("bounds_hi"), py::arg("rng"), py::arg("exclusion_radius") = 0.0);
}
