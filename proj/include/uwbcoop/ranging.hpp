#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "uwbcoop/geometry.hpp"

namespace uwbcoop {

/// One two-way-ranging sample between initiator i (on the UAV) and responder j.
struct RangeMeasurement {
  std::size_t initiator_id{0};
  std::size_t responder_id{0};
  double range{0.0};      // meters, >= 0
  double timestamp{0.0};  // seconds

  friend bool operator==(const RangeMeasurement&, const RangeMeasurement&) = default;
};

/// Additive zero-mean Gaussian range noise. The optional outlier mixture adds a
/// positive |N(0, outlier_sigma)| bias with probability outlier_probability; it
/// is off by default.
struct NoiseModel {
  double sigma{0.10};
  std::uint64_t seed{0};
  double outlier_probability{0.0};
  double outlier_sigma{1.0};

  void validate() const;
};

/// Single-owner random stream. mt19937_64 is fully specified by the standard,
/// so a given seed replays the same draws within one build.
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed);

/// Initiator-major list of every (initiator, responder) pair.
struct RangingSchedule {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double cycle_rate{10.0};  // full sweeps per second

  static RangingSchedule round_robin(const TransceiverLayout& layout, double cycle_rate = 10.0);
  double period() const { return 1.0 / cycle_rate; }
};

/// Euclidean distance plus one Gaussian draw, clamped at zero.
double measure_range(const Vec3& initiator, const Vec3& responder, const NoiseModel& noise,
                     Rng& rng);

/// Ranges every schedule pair against one true pose; all samples carry time t.
std::vector<RangeMeasurement> sweep(const TransceiverLayout& layout, const Pose& true_pose,
                                    const NoiseModel& noise, double t, Rng& rng);

/// CSV with header `t,initiator_id,responder_id,range_m`. Doubles are written in
/// shortest round-trip form so a reload reproduces them bit for bit.
void write_measurements_csv(std::ostream& out, std::span<const RangeMeasurement> measurements);

/// Parses the format above. Throws ParseError with the offending line number.
/// When `line_numbers` is given it receives the source line of every row.
std::vector<RangeMeasurement> read_measurements_csv(
    std::istream& in, std::vector<std::size_t>* line_numbers = nullptr);

/// Splits a time-ordered stream into consecutive runs sharing one timestamp.
std::vector<std::vector<RangeMeasurement>> group_sweeps(std::span<const RangeMeasurement> ms);

}  // namespace uwbcoop
