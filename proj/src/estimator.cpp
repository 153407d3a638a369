#include "uwbcoop/estimator.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Cholesky>

#include "uwbcoop/errors.hpp"

namespace uwbcoop {

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(damping_init > 0.0)) {
    throw InvalidArgument("solver tolerances and damping must be positive");
  }
  if (!std::isfinite(z_floor)) throw InvalidArgument("z_floor must be finite");
}

namespace {

void check_ids(std::span<const RangeMeasurement> ms, std::size_t num_initiators,
               std::size_t num_responders) {
  for (const auto& m : ms) {
    if (m.responder_id >= num_responders) {
      throw InvalidArgument("unknown responder id " + std::to_string(m.responder_id));
    }
    if (m.initiator_id >= num_initiators) {
      throw InvalidArgument("unknown initiator id " + std::to_string(m.initiator_id));
    }
    if (!std::isfinite(m.range)) throw InvalidArgument("range must be finite");
  }
}

void check_responder_geometry(std::span<const RangeMeasurement> ms,
                              std::span<const Vec3> responders) {
  std::set<std::size_t> ids;
  for (const auto& m : ms) ids.insert(m.responder_id);
  std::vector<Vec3> used;
  used.reserve(ids.size());
  for (auto id : ids) used.push_back(responders[id]);
  if (are_collinear(used)) throw DegenerateGeometryError("ranged responders are collinear");
}

// Unit vector from q to p, or zero when they coincide (the range gradient is
// undefined there; zero keeps the step finite).
Vec3 unit_from(const Vec3& q, const Vec3& p, double& dist) {
  const Vec3 d = p - q;
  dist = d.norm();
  return dist > 1e-12 ? Vec3(d / dist) : Vec3::Zero();
}

template <int Dim>
struct LmOutcome {
  Eigen::Matrix<double, Dim, 1> x;
  double cost{0.0};
  int iterations{0};
  bool converged{false};
};

// Levenberg-Marquardt with Marquardt diagonal scaling and x10 / /10 damping.
// `eval` fills residuals and Jacobian; parameter 2 is height and is clamped at
// z_floor after every step; `wrap` post-processes the parameter vector.
template <int Dim, class Eval, class Wrap>
LmOutcome<Dim> levenberg_marquardt(const Eval& eval, const Wrap& wrap,
                                   Eigen::Matrix<double, Dim, 1> x, const SolverConfig& cfg) {
  using VecD = Eigen::Matrix<double, Dim, 1>;
  using MatD = Eigen::Matrix<double, Dim, Dim>;
  using Jac = Eigen::Matrix<double, Eigen::Dynamic, Dim>;

  // Start just above the floor: on a coplanar anchor plane the height gradient
  // is exactly zero and the iteration could never leave it.
  x(2) = std::max(x(2), cfg.z_floor + 1e-3);
  Eigen::VectorXd r;
  Jac J;
  eval(x, r, J);
  double cost = r.squaredNorm();
  double lambda = cfg.damping_init;

  LmOutcome<Dim> out;
  while (out.iterations < cfg.max_iterations) {
    VecD g = J.transpose() * r;
    // At the floor a downward pull is blocked by the projection.
    VecD g_proj = g;
    if (x(2) <= cfg.z_floor && g(2) > 0.0) g_proj(2) = 0.0;
    // Cosine between the residual and each Jacobian column. Unlike max |J^T r|
    // this does not stop early along a nearly flat direction, such as height
    // on the anchor plane.
    const double r_norm = r.norm();
    double cosine = 0.0;
    for (int c = 0; c < Dim; ++c) {
      const double col = J.col(c).norm();
      if (col > 0.0 && r_norm > 0.0) cosine = std::max(cosine, std::abs(g_proj(c)) / (col * r_norm));
    }
    if (cosine < cfg.gradient_tolerance) {
      out.converged = true;
      break;
    }
    ++out.iterations;
    const MatD H = J.transpose() * J;
    const double diag_floor = 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
    MatD A = H;
    A.diagonal() += lambda * H.diagonal().cwiseMax(diag_floor);
    const VecD delta = A.ldlt().solve(-g);

    VecD candidate = x + delta;
    candidate(2) = std::max(candidate(2), cfg.z_floor);
    const double step = (candidate - x).norm();
    if (!std::isfinite(step)) {
      lambda *= 10.0;
      continue;
    }
    if (step < cfg.step_tolerance) {
      out.converged = true;
      break;
    }
    candidate = wrap(candidate);
    Eigen::VectorXd r_new;
    Jac J_new;
    eval(candidate, r_new, J_new);
    const double cost_new = r_new.squaredNorm();
    if (cost_new < cost) {
      x = candidate;
      r = std::move(r_new);
      J = std::move(J_new);
      cost = cost_new;
      lambda = std::max(lambda / 10.0, 1e-15);
    } else {
      lambda = std::min(lambda * 10.0, 1e15);
    }
  }
  out.x = x;
  out.cost = cost;
  return out;
}

}  // namespace

Eigen::VectorXd position_residuals(std::span<const RangeMeasurement> measurements,
                                   std::span<const Vec3> responders, const Vec3& p) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(measurements.size()));
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    r(static_cast<Eigen::Index>(k)) = m.range - (p - responders[m.responder_id]).norm();
  }
  return r;
}

Eigen::MatrixX3d position_jacobian(std::span<const RangeMeasurement> measurements,
                                   std::span<const Vec3> responders, const Vec3& p) {
  Eigen::MatrixX3d J(static_cast<Eigen::Index>(measurements.size()), 3);
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    double dist = 0.0;
    const Vec3 u = unit_from(responders[measurements[k].responder_id], p, dist);
    J.row(static_cast<Eigen::Index>(k)) = -u.transpose();
  }
  return J;
}

double position_cost(std::span<const RangeMeasurement> measurements,
                     std::span<const Vec3> responders, const Vec3& p) {
  return position_residuals(measurements, responders, p).squaredNorm();
}

Eigen::VectorXd pose_residuals(std::span<const RangeMeasurement> measurements,
                               const TransceiverLayout& layout, const Pose& pose) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(measurements.size()));
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    const Vec3 p_i = apply_pose(pose, layout.initiators[m.initiator_id]);
    r(static_cast<Eigen::Index>(k)) = m.range - (p_i - layout.responders[m.responder_id]).norm();
  }
  return r;
}

PoseJacobian pose_jacobian(std::span<const RangeMeasurement> measurements,
                           const TransceiverLayout& layout, const Pose& pose) {
  PoseJacobian J(static_cast<Eigen::Index>(measurements.size()), 4);
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    const Vec3& o = layout.initiators[m.initiator_id].body_offset;
    const Vec3 p_i = apply_pose(pose, layout.initiators[m.initiator_id]);
    double dist = 0.0;
    const Vec3 u = unit_from(layout.responders[m.responder_id], p_i, dist);
    // d/dyaw of R_z(yaw) * o.
    const Vec3 dp_dyaw(-s * o.x() - c * o.y(), c * o.x() - s * o.y(), 0.0);
    const auto row = static_cast<Eigen::Index>(k);
    J.block<1, 3>(row, 0) = -u.transpose();
    J(row, 3) = -u.dot(dp_dyaw);
  }
  return J;
}

double pose_cost(std::span<const RangeMeasurement> measurements, const TransceiverLayout& layout,
                 const Pose& pose) {
  return pose_residuals(measurements, layout, pose).squaredNorm();
}

PositionEstimate solve_position(std::span<const RangeMeasurement> measurements,
                                std::span<const Vec3> responders, const Vec3& initial_guess,
                                const SolverConfig& config) {
  config.validate();
  if (!is_finite(initial_guess)) throw InvalidArgument("initial guess must be finite");
  if (measurements.size() < 3) {
    throw UnderdeterminedError("position needs at least 3 ranges, got " +
                               std::to_string(measurements.size()));
  }
  check_ids(measurements, std::numeric_limits<std::size_t>::max(), responders.size());
  for (const auto& m : measurements) {
    if (m.initiator_id != measurements.front().initiator_id) {
      throw InvalidArgument("solve_position takes ranges from a single initiator");
    }
  }
  check_responder_geometry(measurements, responders);

  const auto eval = [&](const Eigen::Vector3d& x, Eigen::VectorXd& r, Eigen::MatrixX3d& J) {
    r = position_residuals(measurements, responders, x);
    J = position_jacobian(measurements, responders, x);
  };
  const auto identity = [](const Eigen::Vector3d& x) { return x; };
  const auto out = levenberg_marquardt<3>(eval, identity, initial_guess, config);

  PositionEstimate est;
  est.position = out.x;
  est.residual_rms = std::sqrt(out.cost / static_cast<double>(measurements.size()));
  est.iterations = out.iterations;
  est.converged = out.converged;
  return est;
}

namespace {

void check_pose_problem(std::span<const RangeMeasurement> measurements,
                        const TransceiverLayout& layout) {
  layout.validate();
  check_ids(measurements, layout.num_initiators(), layout.num_responders());
  // Yaw is observable only if the ranged initiators do not all share one
  // horizontal offset; otherwise a rotation is absorbed by the position.
  std::set<std::size_t> ids;
  for (const auto& m : measurements) ids.insert(m.initiator_id);
  double spread = 0.0;
  if (!ids.empty()) {
    const Vec3& ref = layout.initiators[*ids.begin()].body_offset;
    for (auto id : ids) {
      spread = std::max(spread, (layout.initiators[id].body_offset - ref).head<2>().norm());
    }
  }
  if (ids.size() < 2 || spread < 1e-9) {
    throw YawUnobservableError("yaw needs two or more initiators with distinct horizontal offsets");
  }
  if (measurements.size() < 4) {
    throw UnderdeterminedError("pose needs at least 4 ranges, got " +
                               std::to_string(measurements.size()));
  }
  check_responder_geometry(measurements, layout.responders);
}

}  // namespace

PoseEstimate solve_pose(std::span<const RangeMeasurement> measurements,
                        const TransceiverLayout& layout, const Pose& initial_guess,
                        const SolverConfig& config) {
  config.validate();
  check_pose_problem(measurements, layout);
  if (!is_finite(initial_guess.position) || !std::isfinite(initial_guess.yaw)) {
    throw InvalidArgument("initial guess must be finite");
  }

  using Vec4 = Eigen::Vector4d;
  const auto eval = [&](const Vec4& x, Eigen::VectorXd& r, PoseJacobian& J) {
    Pose pose;
    pose.position = x.head<3>();
    pose.yaw = x(3);
    r = pose_residuals(measurements, layout, pose);
    J = pose_jacobian(measurements, layout, pose);
  };
  const auto wrap = [](Vec4 x) {
    x(3) = normalize_angle(x(3));
    return x;
  };
  Vec4 x0;
  x0 << initial_guess.position, normalize_angle(initial_guess.yaw);
  const auto out = levenberg_marquardt<4>(eval, wrap, x0, config);

  PoseEstimate est;
  est.pose = Pose(out.x.head<3>(), out.x(3));
  est.residual_rms = std::sqrt(out.cost / static_cast<double>(measurements.size()));
  est.iterations = out.iterations;
  est.converged = out.converged;
  return est;
}

Pose initialize_pose(std::span<const RangeMeasurement> measurements,
                     const TransceiverLayout& layout, const Vec3& position_guess,
                     const SolverConfig& config) {
  check_pose_problem(measurements, layout);

  std::vector<std::size_t> ids;
  for (const auto& m : measurements) {
    if (std::find(ids.begin(), ids.end(), m.initiator_id) == ids.end()) {
      ids.push_back(m.initiator_id);
    }
  }
  std::sort(ids.begin(), ids.end());

  struct Fix {
    std::size_t id;
    Vec3 tag;
  };
  std::vector<Fix> fixes;
  for (auto id : ids) {
    std::vector<RangeMeasurement> own;
    for (const auto& m : measurements) {
      if (m.initiator_id == id) own.push_back(m);
    }
    try {
      const Vec3 guess = position_guess + layout.initiators[id].body_offset;
      fixes.push_back({id, solve_position(own, layout.responders, guess, config).position});
    } catch (const UnderdeterminedError&) {
    } catch (const DegenerateGeometryError&) {
    }
  }

  double yaw = 0.0;
  std::size_t best_a = 0;
  std::size_t best_b = 0;
  double best_baseline = 0.0;
  for (std::size_t a = 0; a < fixes.size(); ++a) {
    for (std::size_t b = a + 1; b < fixes.size(); ++b) {
      const double baseline = (layout.initiators[fixes[b].id].body_offset -
                               layout.initiators[fixes[a].id].body_offset)
                                  .head<2>()
                                  .norm();
      if (baseline > best_baseline) {
        best_baseline = baseline;
        best_a = a;
        best_b = b;
      }
    }
  }
  if (best_baseline > 0.0) {
    const Vec3 body = layout.initiators[fixes[best_b].id].body_offset -
                      layout.initiators[fixes[best_a].id].body_offset;
    const Vec3 world = fixes[best_b].tag - fixes[best_a].tag;
    yaw = std::atan2(world.y(), world.x()) - std::atan2(body.y(), body.x());
  }
  if (fixes.empty()) return Pose(position_guess, 0.0);

  Pose pose(Vec3::Zero(), yaw);
  const Eigen::Matrix3d R = yaw_rotation(pose.yaw);
  Vec3 sum = Vec3::Zero();
  for (const auto& f : fixes) sum += f.tag - R * layout.initiators[f.id].body_offset;
  pose.position = sum / static_cast<double>(fixes.size());
  pose.position.z() = std::max(pose.position.z(), config.z_floor);
  return pose;
}

SweepPositioner::SweepPositioner(TransceiverLayout layout, SolverConfig config, double init_lift)
    : layout_(std::move(layout)), config_(config), init_lift_(init_lift) {
  layout_.validate();
  config_.validate();
  anchor_centroid_ = centroid(layout_.responders);
}

void SweepPositioner::reset() {
  last_tag_.reset();
  last_pose_.reset();
}

Vec3 SweepPositioner::lifted(Vec3 guess) const {
  guess.z() = std::max(guess.z(), anchor_centroid_.z() + init_lift_);
  return guess;
}

SweepPositioner::Result SweepPositioner::update(std::span<const RangeMeasurement> sweep,
                                                double yaw_hint) {
  Result res;
  if (layout_.num_initiators() == 1) {
    const Vec3 guess = lifted(last_tag_.value_or(anchor_centroid_));
    const auto est = solve_position(sweep, layout_.responders, guess, config_);
    last_tag_ = est.position;
    const Pose hinted(Vec3::Zero(), yaw_hint);
    res.position = est.position - yaw_rotation(hinted.yaw) * layout_.initiators[0].body_offset;
    res.residual_rms = est.residual_rms;
    res.iterations = est.iterations;
    res.converged = est.converged;
    return res;
  }

  Pose guess;
  if (last_pose_) {
    guess = *last_pose_;
    guess.position = lifted(guess.position);
  } else {
    guess = initialize_pose(sweep, layout_, lifted(anchor_centroid_), config_);
    guess.position = lifted(guess.position);
  }
  const auto est = solve_pose(sweep, layout_, guess, config_);
  last_pose_ = est.pose;
  res.position = est.pose.position;
  res.yaw = est.pose.yaw;
  res.residual_rms = est.residual_rms;
  res.iterations = est.iterations;
  res.converged = est.converged;
  return res;
}

}  // namespace uwbcoop
