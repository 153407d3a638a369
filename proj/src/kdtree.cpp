#include "uwbcoop/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace uwbcoop {

namespace {

struct HeapEntry {
  double dist2;
  std::size_t index;
  // Max-heap on (distance, index): the top is the current worst candidate.
  bool operator<(const HeapEntry& o) const {
    return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
  }
};

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

std::ptrdiff_t KdTree::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                             int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                   idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::size_t a, std::size_t b) {
                     const double va = points_[a][axis];
                     const double vb = points_[b][axis];
                     return va != vb ? va < vb : a < b;
                   });
  const auto node = static_cast<std::ptrdiff_t>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const auto left = build(idx, lo, mid, depth + 1);
  const auto right = build(idx, mid + 1, hi, depth + 1);
  nodes_[static_cast<std::size_t>(node)].left = left;
  nodes_[static_cast<std::size_t>(node)].right = right;
  return node;
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& query, std::size_t k,
                                          double max_radius) const {
  std::vector<Neighbor> out;
  if (k == 0 || root_ < 0 || !(max_radius >= 0.0)) return out;
  const double r2 = max_radius * max_radius;
  std::priority_queue<HeapEntry> heap;

  auto bound = [&]() { return heap.size() < k ? r2 : std::min(r2, heap.top().dist2); };

  // Iterative depth-first search, near side first.
  std::vector<std::pair<std::ptrdiff_t, double>> stack;  // node, squared plane gap
  stack.emplace_back(root_, 0.0);
  while (!stack.empty()) {
    const auto [ni, gap2] = stack.back();
    stack.pop_back();
    if (ni < 0 || gap2 > bound()) continue;
    const Node& n = nodes_[static_cast<std::size_t>(ni)];
    const Vec3& p = points_[n.point];
    const double d2 = (p - query).squaredNorm();
    if (d2 <= r2) {
      const HeapEntry e{d2, n.point};
      if (heap.size() < k) {
        heap.push(e);
      } else if (e < heap.top()) {
        heap.pop();
        heap.push(e);
      }
    }
    const double diff = query[n.axis] - p[n.axis];
    const auto near = diff <= 0.0 ? n.left : n.right;
    const auto far = diff <= 0.0 ? n.right : n.left;
    stack.emplace_back(far, diff * diff);
    stack.emplace_back(near, 0.0);
  }

  out.reserve(heap.size());
  while (!heap.empty()) {
    out.push_back({heap.top().index, std::sqrt(heap.top().dist2)});
    heap.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace uwbcoop
