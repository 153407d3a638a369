#include "uwbcoop/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "uwbcoop/errors.hpp"

namespace uwbcoop {

double normalize_angle(double angle) {
  if (!std::isfinite(angle)) throw InvalidArgument("angle must be finite");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

bool is_finite(const Vec3& v) { return v.allFinite(); }

Pose::Pose(const Vec3& pos, double yaw_in) : position(pos), yaw(normalize_angle(yaw_in)) {
  if (!is_finite(pos)) throw InvalidArgument("pose position must be finite");
}

RigidOffset::RigidOffset(const Vec3& offset) : body_offset(offset) {
  if (!is_finite(offset)) throw InvalidArgument("initiator offset must be finite");
  if (offset.norm() >= kMaxMagnitude) {
    throw InvalidArgument("initiator offset magnitude must be below 2 m");
  }
}

void TransceiverLayout::validate() const {
  if (initiators.empty()) throw InvalidArgument("layout needs at least one initiator");
  if (responders.empty()) throw InvalidArgument("layout needs at least one responder");
  for (std::size_t a = 0; a < responders.size(); ++a) {
    if (!is_finite(responders[a])) throw InvalidArgument("responder position must be finite");
    for (std::size_t b = a + 1; b < responders.size(); ++b) {
      if (responders[a] == responders[b]) {
        throw InvalidArgument("responders " + std::to_string(a) + " and " + std::to_string(b) +
                              " coincide");
      }
    }
  }
  for (std::size_t a = 0; a < initiators.size(); ++a) {
    const Vec3& oa = initiators[a].body_offset;
    if (!is_finite(oa) || oa.norm() >= RigidOffset::kMaxMagnitude) {
      throw InvalidArgument("initiator offset out of bounds");
    }
    for (std::size_t b = a + 1; b < initiators.size(); ++b) {
      if (oa == initiators[b].body_offset) {
        throw InvalidArgument("initiators " + std::to_string(a) + " and " + std::to_string(b) +
                              " share an offset");
      }
    }
  }
}

Eigen::Matrix3d yaw_rotation(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

Vec3 apply_pose(const Pose& pose, const RigidOffset& offset) {
  if (offset.body_offset.isZero(0.0)) return pose.position;
  return yaw_rotation(pose.yaw) * offset.body_offset + pose.position;
}

std::vector<Vec3> square_anchor_layout(double separation, double height) {
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw InvalidArgument("anchor separation must be positive");
  }
  if (!std::isfinite(height)) throw InvalidArgument("anchor height must be finite");
  const double h = 0.5 * separation;
  return {Vec3(-h, -h, height), Vec3(h, -h, height), Vec3(h, h, height), Vec3(-h, h, height)};
}

std::vector<RigidOffset> default_initiators(std::size_t count) {
  if (count == 0) throw InvalidArgument("initiator count must be positive");
  if (count == 1) return {RigidOffset(Vec3::Zero())};
  // Evenly spaced along body x over [-0.2, 0.2], listed front to back.
  std::vector<RigidOffset> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = 0.2 - 0.4 * static_cast<double>(i) / static_cast<double>(count - 1);
    out.emplace_back(Vec3(x, 0.0, 0.0));
  }
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  if (points.empty()) throw InvalidArgument("centroid of an empty set");
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

bool are_collinear(std::span<const Vec3> points, double tol) {
  if (points.size() < 3) return true;
  // Pick the farthest point from the first to define the line direction.
  const Vec3& a = points.front();
  std::size_t far = 0;
  double best = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = (points[i] - a).norm();
    if (d > best) {
      best = d;
      far = i;
    }
  }
  if (best <= tol) return true;
  const Vec3 dir = (points[far] - a) / best;
  for (const auto& p : points) {
    if (dir.cross(p - a).norm() > tol) return false;
  }
  return true;
}

}  // namespace uwbcoop
