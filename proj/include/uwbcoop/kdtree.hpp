#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uwbcoop/geometry.hpp"

namespace uwbcoop {

/// Static 3-d tree over a point set, built once per lidar frame.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index;
    double distance;
  };

  explicit KdTree(std::span<const Vec3> points);

  /// Up to `k` nearest points no farther than `max_radius`, closest first.
  /// Ties are broken by point index so results are deterministic.
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k, double max_radius) const;

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

 private:
  struct Node {
    std::size_t point;  // index into points_
    int axis;
    std::ptrdiff_t left{-1};
    std::ptrdiff_t right{-1};
  };

  std::ptrdiff_t build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::ptrdiff_t root_{-1};
};

}  // namespace uwbcoop
