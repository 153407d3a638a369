#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbcoop/flightsim.hpp"

namespace uwbcoop {

enum class ErrorKind { positioning, navigation };

std::string to_string(ErrorKind k);

struct ErrorSample {
  double t{0.0};
  double xy{0.0};
  std::optional<double> z;  // absent for navigation errors
};

struct ErrorSeries {
  ErrorKind kind{ErrorKind::positioning};
  std::vector<ErrorSample> samples;

  std::vector<double> xy() const;
  /// Only the samples that carry a z component.
  std::vector<double> z() const;
};

/// Planar and vertical distance between estimate and truth per sample. Throws
/// InvalidArgument if any sample lacks an estimate.
ErrorSeries positioning_errors(const FlightRecord& record);

/// Planar distance from the true position to the commanded path: the vertical
/// line for vertical flights, the cruise polyline for square flights (samples
/// before cruise_start_time are dropped).
ErrorSeries navigation_errors(const FlightRecord& record);

/// Planar distance from `p` to the closed polyline `path`, ignoring z.
double planar_distance_to_polyline(const Vec3& p, std::span<const Vec3> path);

/// Box-plot summary. Quartiles use linear interpolation between order
/// statistics (R type 7); whiskers reach the most extreme data within
/// 1.5 IQR of the box.
struct BoxStats {
  double median{0.0};
  double q1{0.0};
  double q3{0.0};
  double whisker_low{0.0};
  double whisker_high{0.0};
  double mean{0.0};
  double min{0.0};
  double max{0.0};
  std::size_t count{0};

  double iqr() const { return q3 - q1; }
  /// Share of samples strictly above `threshold`.
  double fraction_above(double threshold) const;

 private:
  friend BoxStats box_stats(std::span<const double> values);
  std::vector<double> sorted_;
};

/// Throws InvalidArgument on an empty or non-finite series.
BoxStats box_stats(std::span<const double> values);

/// Type-7 quantile of already sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace uwbcoop
