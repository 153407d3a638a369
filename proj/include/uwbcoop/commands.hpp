#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "uwbcoop/campaign.hpp"
#include "uwbcoop/groundtruth.hpp"

namespace uwbcoop::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct SimulateOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides output_dir
  std::optional<std::uint64_t> seed;         // replaces the seed list
  unsigned jobs{0};                          // 0 = hardware concurrency
  ReportFormat format{ReportFormat::json};
};

struct EstimateOptions {
  std::filesystem::path ranges;
  std::filesystem::path layout;  // layout JSON or a run sidecar
  std::filesystem::path out;
  ReportFormat format{ReportFormat::csv};
};

struct TrackOptions {
  std::filesystem::path frames;
  std::optional<std::string> init;  // "x,y,z" or "x,y,z,vx,vy,vz"
  std::filesystem::path out;
  TrackerConfig tracker;
  ReportFormat format{ReportFormat::csv};
};

struct ReportOptions {
  std::filesystem::path in;
  std::filesystem::path out;
  ReportFormat format{ReportFormat::json};
};

// Each command reports diagnostics on `log` and returns an exit code.
int cmd_simulate(const SimulateOptions& opts, std::ostream& log);
int cmd_estimate(const EstimateOptions& opts, std::ostream& log);
int cmd_track(const TrackOptions& opts, std::ostream& log);
int cmd_report(const ReportOptions& opts, std::ostream& log);

struct SweepEstimate {
  double t{0.0};
  SweepPositioner::Result result;
};

/// Per-sweep offline positioning with the same warm-start rules as the flight
/// simulator.
std::vector<SweepEstimate> estimate_sweeps(std::span<const RangeMeasurement> measurements,
                                           const LayoutDocument& doc);

/// Columns: t,est_x,est_y,est_z,yaw,residual_rms,iterations,converged.
std::string estimates_to_csv(std::span<const SweepEstimate> estimates);

/// Columns: frame,t,x,y,z,vx,vy,vz.
std::string track_to_csv(std::span<const PointCloudFrame> frames,
                         std::span<const TrackState> states);

}  // namespace uwbcoop::cli
