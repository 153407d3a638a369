#include "uwbcoop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uwbcoop/errors.hpp"

namespace uwbcoop {

std::string to_string(ErrorKind k) {
  return k == ErrorKind::positioning ? "positioning" : "navigation";
}

std::vector<double> ErrorSeries::xy() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.xy);
  return out;
}

std::vector<double> ErrorSeries::z() const {
  std::vector<double> out;
  for (const auto& s : samples) {
    if (s.z) out.push_back(*s.z);
  }
  return out;
}

ErrorSeries positioning_errors(const FlightRecord& record) {
  if (!record.has_estimates()) throw InvalidArgument("flight record carries no estimates");
  ErrorSeries series;
  series.kind = ErrorKind::positioning;
  series.samples.reserve(record.samples.size());
  for (const auto& s : record.samples) {
    const Vec3 d = *s.estimate - s.true_pose.position;
    series.samples.push_back({s.t, d.head<2>().norm(), std::abs(d.z())});
  }
  return series;
}

double planar_distance_to_polyline(const Vec3& p, std::span<const Vec3> path) {
  if (path.empty()) throw InvalidArgument("empty path");
  const Eigen::Vector2d q = p.head<2>();
  if (path.size() == 1) return (q - path[0].head<2>()).norm();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Eigen::Vector2d a = path[i - 1].head<2>();
    const Eigen::Vector2d b = path[i].head<2>();
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (q - (a + s * ab)).norm());
  }
  return best;
}

ErrorSeries navigation_errors(const FlightRecord& record) {
  ErrorSeries series;
  series.kind = ErrorKind::navigation;
  switch (record.trajectory.kind) {
    case TrajectoryKind::vertical:
      for (const auto& s : record.samples) {
        series.samples.push_back({s.t, s.true_pose.position.head<2>().norm(), std::nullopt});
      }
      return series;
    case TrajectoryKind::square: {
      const auto path = cruise_path(record.trajectory);
      // Small slack so the sample that lands exactly on cruise start counts.
      const double start = cruise_start_time(record.trajectory) - 1e-9;
      for (const auto& s : record.samples) {
        if (s.t < start) continue;
        series.samples.push_back(
            {s.t, planar_distance_to_polyline(s.true_pose.position, path), std::nullopt});
      }
      return series;
    }
  }
  throw InvalidArgument("unknown trajectory kind");
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty series");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double BoxStats::fraction_above(double threshold) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), threshold);
  return static_cast<double>(sorted_.end() - it) / static_cast<double>(sorted_.size());
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("box_stats of an empty series");
  BoxStats b;
  b.sorted_.assign(values.begin(), values.end());
  if (!std::all_of(b.sorted_.begin(), b.sorted_.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("box_stats needs finite values");
  }
  std::sort(b.sorted_.begin(), b.sorted_.end());
  const auto& s = b.sorted_;
  b.count = s.size();
  b.min = s.front();
  b.max = s.back();
  b.median = quantile_sorted(s, 0.5);
  b.q1 = quantile_sorted(s, 0.25);
  b.q3 = quantile_sorted(s, 0.75);
  b.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());

  const double lo_fence = b.q1 - 1.5 * b.iqr();
  const double hi_fence = b.q3 + 1.5 * b.iqr();
  const auto lo_it = std::lower_bound(s.begin(), s.end(), lo_fence);
  const auto hi_it = std::upper_bound(s.begin(), s.end(), hi_fence);
  b.whisker_low = std::min(b.q1, *lo_it);
  b.whisker_high = std::max(b.q3, *std::prev(hi_it));
  return b;
}

}  // namespace uwbcoop
