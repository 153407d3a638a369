#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "uwbcoop/geometry.hpp"
#include "uwbcoop/ranging.hpp"

namespace uwbcoop {

/// One lidar sweep.
struct PointCloudFrame {
  std::vector<Vec3> points;
  double frame_time{0.0};
};

/// Tracked UAV state: last position and velocity (m/s).
struct TrackState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
};

struct TrackerConfig {
  double frame_rate{10.0};  // Hz
  std::size_t k_neighbors{30};
  double max_radius{1.0};  // m

  void validate() const;
};

/// One tracking update on a new frame:
///   1. build a KD-tree over the frame,
///   2. predict by dead reckoning, position + velocity / frame_rate,
///   3. gather the k nearest points within max_radius of the prediction,
///   4. new position = centroid of that set,
///      new velocity = (new - previous position) * frame_rate.
/// Throws TrackLostError (carrying the prediction) if the gate is empty.
TrackState track_step(const PointCloudFrame& frame, const TrackState& prev,
                      const TrackerConfig& config = {});

/// Folds track_step over a sequence. The returned list has one state per frame.
/// TrackLostError propagates; the caller learns the frame from its message.
std::vector<TrackState> track_sequence(std::span<const PointCloudFrame> frames,
                                       const TrackState& init, const TrackerConfig& config = {});

struct Bounds {
  Vec3 lo{Vec3::Constant(-10.0)};
  Vec3 hi{Vec3::Constant(10.0)};
};

/// Synthetic lidar frame: n_points Gaussian returns (std = spread) around the
/// UAV plus `clutter` uniform points in `bounds`. When `exclusion_radius` > 0,
/// clutter is redrawn until it falls outside that radius around the UAV.
PointCloudFrame synth_cloud(const Vec3& uav_position, std::size_t n_points, double spread,
                            std::size_t clutter, const Bounds& bounds, Rng& rng,
                            double exclusion_radius = 0.0, double frame_time = 0.0);

// Frame files. CSV is one `x,y,z` per line (a header line is allowed). The
// binary form is little-endian: u32 count, then count x 3 float64.
PointCloudFrame read_frame_csv(std::istream& in);
void write_frame_csv(std::ostream& out, const PointCloudFrame& frame);
PointCloudFrame read_frame_binary(std::istream& in);
void write_frame_binary(std::ostream& out, const PointCloudFrame& frame);

/// Loads every *.csv / *.bin frame in `dir`, sorted by file name, stamping
/// frame i with i / frame_rate. Throws InvalidArgument if there are none.
std::vector<PointCloudFrame> load_frame_directory(const std::filesystem::path& dir,
                                                  double frame_rate);

}  // namespace uwbcoop
