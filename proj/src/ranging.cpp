#include "uwbcoop/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "uwbcoop/csv.hpp"
#include "uwbcoop/errors.hpp"

namespace uwbcoop {

void NoiseModel::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise sigma must be >= 0");
  if (!(outlier_probability >= 0.0 && outlier_probability <= 1.0)) {
    throw InvalidArgument("outlier probability must lie in [0, 1]");
  }
  if (!(outlier_sigma >= 0.0) || !std::isfinite(outlier_sigma)) {
    throw InvalidArgument("outlier sigma must be >= 0");
  }
}

Rng make_rng(std::uint64_t seed) { return Rng(seed); }

RangingSchedule RangingSchedule::round_robin(const TransceiverLayout& layout, double cycle_rate) {
  if (!(cycle_rate > 0.0)) throw InvalidArgument("cycle rate must be positive");
  RangingSchedule s;
  s.cycle_rate = cycle_rate;
  s.pairs.reserve(layout.num_initiators() * layout.num_responders());
  for (std::size_t i = 0; i < layout.num_initiators(); ++i) {
    for (std::size_t j = 0; j < layout.num_responders(); ++j) s.pairs.emplace_back(i, j);
  }
  return s;
}

double measure_range(const Vec3& initiator, const Vec3& responder, const NoiseModel& noise,
                     Rng& rng) {
  const double truth = (initiator - responder).norm();
  double z = truth;
  if (noise.sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise.sigma);
    z += gauss(rng);
  }
  // The uniform draw only happens when the mixture is enabled, so the default
  // stream is identical to the pure-Gaussian one.
  if (noise.outlier_probability > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < noise.outlier_probability) {
      std::normal_distribution<double> bias(0.0, noise.outlier_sigma);
      z += std::abs(bias(rng));
    }
  }
  return std::max(z, 0.0);
}

std::vector<RangeMeasurement> sweep(const TransceiverLayout& layout, const Pose& true_pose,
                                    const NoiseModel& noise, double t, Rng& rng) {
  const auto schedule = RangingSchedule::round_robin(layout);
  std::vector<RangeMeasurement> out;
  out.reserve(schedule.pairs.size());
  std::size_t last_initiator = layout.num_initiators();
  Vec3 p_i = Vec3::Zero();
  for (const auto& [i, j] : schedule.pairs) {
    if (i != last_initiator) {
      p_i = apply_pose(true_pose, layout.initiators[i]);
      last_initiator = i;
    }
    out.push_back({i, j, measure_range(p_i, layout.responders[j], noise, rng), t});
  }
  return out;
}

void write_measurements_csv(std::ostream& out, std::span<const RangeMeasurement> measurements) {
  out << "t,initiator_id,responder_id,range_m\n";
  for (const auto& m : measurements) {
    out << csv::format(m.timestamp) << ',' << m.initiator_id << ',' << m.responder_id << ','
        << csv::format(m.range) << '\n';
  }
}

std::vector<RangeMeasurement> read_measurements_csv(std::istream& in,
                                                    std::vector<std::size_t>* line_numbers) {
  std::vector<RangeMeasurement> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    const auto fields = csv::split(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 4 && fields[0] == "t") continue;
    }
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
    }
    RangeMeasurement m;
    m.timestamp = csv::parse_double(fields[0], line_no, "timestamp");
    m.initiator_id = csv::parse_index(fields[1], line_no, "initiator_id");
    m.responder_id = csv::parse_index(fields[2], line_no, "responder_id");
    m.range = csv::parse_double(fields[3], line_no, "range");
    if (m.range < 0.0) throw ParseError("negative range", line_no);
    out.push_back(m);
    if (line_numbers) line_numbers->push_back(line_no);
  }
  return out;
}

std::vector<std::vector<RangeMeasurement>> group_sweeps(std::span<const RangeMeasurement> ms) {
  std::vector<std::vector<RangeMeasurement>> groups;
  for (const auto& m : ms) {
    if (groups.empty() || groups.back().front().timestamp != m.timestamp) groups.emplace_back();
    groups.back().push_back(m);
  }
  return groups;
}

}  // namespace uwbcoop
