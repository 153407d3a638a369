#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace uwbcoop {

/// World-frame coordinates in meters; z up, ground plane at z = 0.
using Vec3 = Eigen::Vector3d;

/// Maps any finite angle into (-pi, pi].
double normalize_angle(double angle);

bool is_finite(const Vec3& v);

/// UAV position plus heading. Body frame is x forward, y left, z up; yaw is
/// counter-clockwise seen from above.
struct Pose {
  Vec3 position{Vec3::Zero()};
  double yaw{0.0};

  Pose() = default;
  /// Normalizes yaw; throws InvalidArgument on non-finite input.
  Pose(const Vec3& position, double yaw);
};

/// Mounting point of an initiator in the UAV body frame.
struct RigidOffset {
  static constexpr double kMaxMagnitude = 2.0;

  Vec3 body_offset{Vec3::Zero()};

  RigidOffset() = default;
  /// Throws InvalidArgument if non-finite or longer than kMaxMagnitude.
  explicit RigidOffset(const Vec3& offset);
};

/// Initiators ride on the UAV, responders sit at fixed world positions.
struct TransceiverLayout {
  std::vector<RigidOffset> initiators;
  std::vector<Vec3> responders;

  /// Throws InvalidArgument when empty or when positions repeat.
  void validate() const;
  std::size_t num_initiators() const { return initiators.size(); }
  std::size_t num_responders() const { return responders.size(); }
};

/// Rotation about world z by `yaw`.
Eigen::Matrix3d yaw_rotation(double yaw);

/// World position of an initiator: R_z(yaw) * offset + position.
Vec3 apply_pose(const Pose& pose, const RigidOffset& offset);

/// Four responders on the corners of an axis-aligned square of side
/// `separation`, centered on the origin at z = height. Corner order is
/// (-,-), (+,-), (+,+), (-,+).
std::vector<Vec3> square_anchor_layout(double separation, double height = 0.0);

/// Default initiator mounting: one initiator at the body origin, or `count`
/// initiators spread along body x (two gives (+0.2,0,0) and (-0.2,0,0)).
std::vector<RigidOffset> default_initiators(std::size_t count);

Vec3 centroid(std::span<const Vec3> points);

/// True when every point lies within `tol` of a single line.
bool are_collinear(std::span<const Vec3> points, double tol = 1e-9);

}  // namespace uwbcoop
