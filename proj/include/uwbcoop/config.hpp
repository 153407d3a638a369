#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwbcoop/flightsim.hpp"

namespace uwbcoop {

/// A responder set plus the label used in run ids and reports.
struct LayoutSpec {
  std::string label;
  double separation{0.0};  // 0 for explicit coordinates
  std::vector<Vec3> responders;
};

/// Everything a simulation campaign needs. See configs/README.md for the file
/// schema; configs/reproduction.json is the canonical example.
struct ExperimentConfig {
  std::vector<LayoutSpec> layouts;
  std::vector<RigidOffset> initiators{default_initiators(1)};
  double sigma{0.10};
  double outlier_probability{0.0};
  double outlier_sigma{1.0};
  std::vector<std::uint64_t> seeds;
  std::vector<Trajectory> trajectories;
  std::vector<FeedbackSource> feedback{FeedbackSource::truth, FeedbackSource::uwb};
  FlightConfig flight;
  std::filesystem::path output_dir{"out"};

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  /// Fully resolved configuration, suitable for metadata sidecars.
  nlohmann::json to_json() const;
};

/// Parses and validates a config tree. Relative file references resolve
/// against `base_dir`. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& tree, const std::filesystem::path& base_dir);

/// Reads a JSON config file. Throws ConfigError (parse failures included).
ExperimentConfig load_config(const std::filesystem::path& path);

/// The simulation settings of the reproduction study: sigma 0.10 m, square
/// layouts of 0.6/1.2/3/4/12/16 m, a vertical climb to 30 m and 8 x 8 m squares
/// at 5/10/20 m, seeds 1..20.
ExperimentConfig reproduction_config();

/// Layout (and optional solver settings) from a JSON document. Accepts either a
/// bare layout object or a run sidecar with a nested "layout" key. Fields:
/// "separation" (+ optional "height") or "responders"; optional "initiators".
struct LayoutDocument {
  TransceiverLayout layout;
  SolverConfig solver;
  double init_lift{1.0};
};
LayoutDocument parse_layout_document(const nlohmann::json& doc);

nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const Trajectory& t);
nlohmann::json to_json(const SolverConfig& s);
nlohmann::json to_json(const TransceiverLayout& l);
Trajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace uwbcoop
