#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwbcoop/config.hpp"
#include "uwbcoop/flightsim.hpp"
#include "uwbcoop/metrics.hpp"

namespace uwbcoop {

/// One flight of a campaign.
struct RunSpec {
  std::size_t index{0};
  std::string run_id;
  LayoutSpec layout;
  Trajectory trajectory;
  std::uint64_t seed{0};
  FeedbackSource feedback{FeedbackSource::truth};
};

/// Layouts x trajectories x seeds x feedback sources, in that nesting order.
std::vector<RunSpec> plan_campaign(const ExperimentConfig& config);

/// Runs one flight with the campaign's shared settings.
FlightRecord execute_run(const ExperimentConfig& config, const RunSpec& spec);

enum class ReportFormat { csv, json };

struct CampaignResult {
  std::size_t runs{0};
  std::vector<std::string> failures;  // "run_id: message"
  bool ok() const { return failures.empty(); }
};

/// Runs every planned flight on `jobs` worker threads and writes, under `out`:
///   runs/<run_id>.csv             flight record
///   runs/<run_id>_ranges.csv      raw range measurements
///   errors.csv                    long-form error table
///   summary.json | summary.csv    box statistics per run and error kind
/// each with a `.json` metadata sidecar. Files are written atomically and do
/// not depend on `jobs` or scheduling order.
CampaignResult run_campaign(const ExperimentConfig& config, const std::filesystem::path& out,
                            unsigned jobs, ReportFormat format);

/// Writes `content` to a sibling temp file, then renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Writes `content` to `path` and `meta` to `path` + ".json".
void write_with_sidecar(const std::filesystem::path& path, const std::string& content,
                        const nlohmann::json& meta);

/// Per-run summary row: box statistics for positioning xy/z and navigation xy.
nlohmann::json run_summary(const RunSpec& spec, const FlightRecord& record);

/// Appends `run_id,separation_m,kind,axis,t,error_m` rows for one series.
void append_error_rows(std::ostream& out, const std::string& run_id, double separation,
                       const ErrorSeries& series);

nlohmann::json to_json(const BoxStats& b);

/// Reads a flight CSV plus its metadata sidecar back into a record (ranges are
/// not restored).
FlightRecord read_flight_record(const std::filesystem::path& csv_path);

/// Rebuilds summary rows from a `simulate` output directory.
nlohmann::json report_directory(const std::filesystem::path& dir);

/// Flattens summary rows into CSV (one row per run, kind and axis).
std::string summary_to_csv(const nlohmann::json& rows);

}  // namespace uwbcoop
