#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uwbcoop/geometry.hpp"
#include "uwbcoop/ranging.hpp"

namespace uwbcoop {

/// Levenberg-Marquardt settings shared by both estimators.
struct SolverConfig {
  int max_iterations{50};
  double gradient_tolerance{1e-9};  // on max_j |J_j^T r| / (|J_j| |r|)
  double step_tolerance{1e-10};     // on the norm of an accepted/projected step
  double damping_init{1e-3};
  double z_floor{0.0};  // solutions are projected onto z >= z_floor

  void validate() const;
};

struct PositionEstimate {
  Vec3 position{Vec3::Zero()};
  double residual_rms{0.0};
  int iterations{0};
  bool converged{false};
};

struct PoseEstimate {
  Pose pose;
  double residual_rms{0.0};
  int iterations{0};
  bool converged{false};
};

using PoseJacobian = Eigen::Matrix<double, Eigen::Dynamic, 4>;

// Residuals are r_k = z_k - ||p - q_j(k)||, one per measurement, in input order.
Eigen::VectorXd position_residuals(std::span<const RangeMeasurement> measurements,
                                   std::span<const Vec3> responders, const Vec3& p);
Eigen::MatrixX3d position_jacobian(std::span<const RangeMeasurement> measurements,
                                   std::span<const Vec3> responders, const Vec3& p);
double position_cost(std::span<const RangeMeasurement> measurements,
                     std::span<const Vec3> responders, const Vec3& p);

// Pose residuals use the initiator world position f_i(p, yaw). Jacobian columns
// are (x, y, z, yaw).
Eigen::VectorXd pose_residuals(std::span<const RangeMeasurement> measurements,
                               const TransceiverLayout& layout, const Pose& pose);
PoseJacobian pose_jacobian(std::span<const RangeMeasurement> measurements,
                           const TransceiverLayout& layout, const Pose& pose);
double pose_cost(std::span<const RangeMeasurement> measurements, const TransceiverLayout& layout,
                 const Pose& pose);

/// Least-squares tag position from ranges of a single initiator.
///
/// Throws UnderdeterminedError for fewer than 3 measurements,
/// DegenerateGeometryError when the ranged responders are collinear, and
/// InvalidArgument for mixed initiators or out-of-range responder ids.
/// Non-convergence is reported through `converged`, not an exception.
PositionEstimate solve_position(std::span<const RangeMeasurement> measurements,
                                std::span<const Vec3> responders, const Vec3& initial_guess,
                                const SolverConfig& config = {});

/// Joint position and yaw from ranges of two or more initiators.
///
/// Throws YawUnobservableError unless at least two ranged initiators have
/// distinct horizontal offsets, UnderdeterminedError below 4 measurements and
/// DegenerateGeometryError for collinear responders.
PoseEstimate solve_pose(std::span<const RangeMeasurement> measurements,
                        const TransceiverLayout& layout, const Pose& initial_guess,
                        const SolverConfig& config = {});

/// Starting pose for solve_pose: each initiator is fixed on its own, yaw comes
/// from the bearing between the two fixes farthest apart in the body frame.
Pose initialize_pose(std::span<const RangeMeasurement> measurements,
                     const TransceiverLayout& layout, const Vec3& position_guess,
                     const SolverConfig& config = {});

/// Brute-force reference minimizer for the position objective: exhaustive grid
/// over the cube center +- half_width at `resolution`, then coordinate descent.
/// Shares no code with solve_position. If the minimum lies outside the cube the
/// result sits on the cube boundary.
Vec3 oracle_position(std::span<const RangeMeasurement> measurements,
                     std::span<const Vec3> responders, const Vec3& search_center,
                     double search_half_width, double resolution = 0.01);

/// Warm-started per-sweep positioning used by the flight simulator and by the
/// offline `estimate` command, so both produce identical estimates.
///
/// One initiator: solve_position, then the body origin is recovered with the
/// caller's yaw hint. Two or more: solve_pose. The first call starts from the
/// responder centroid; later calls start from the previous solution. Starting
/// heights are lifted to at least `init_lift` above the responder centroid
/// because the vertical gradient vanishes on a coplanar anchor plane.
class SweepPositioner {
 public:
  struct Result {
    Vec3 position{Vec3::Zero()};
    std::optional<double> yaw;
    double residual_rms{0.0};
    int iterations{0};
    bool converged{false};
  };

  SweepPositioner(TransceiverLayout layout, SolverConfig config, double init_lift = 1.0);

  Result update(std::span<const RangeMeasurement> sweep, double yaw_hint = 0.0);
  void reset();
  const TransceiverLayout& layout() const { return layout_; }

 private:
  Vec3 lifted(Vec3 guess) const;

  TransceiverLayout layout_;
  SolverConfig config_;
  double init_lift_;
  Vec3 anchor_centroid_;
  std::optional<Vec3> last_tag_;
  std::optional<Pose> last_pose_;
};

}  // namespace uwbcoop
