// uwbcoop: simulate / estimate / track / report.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "uwbcoop/commands.hpp"

namespace {

const std::map<std::string, uwbcoop::ReportFormat> kFormats{
    {"csv", uwbcoop::ReportFormat::csv}, {"json", uwbcoop::ReportFormat::json}};

}  // namespace

int main(int argc, char** argv) {
  using namespace uwbcoop::cli;

  CLI::App app{"Cooperative UWB localization: simulation, estimation and tracking"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation campaign from a config file");
  simulate->add_option("--config", sim.config, "Experiment config (JSON)")->required();
  auto* sim_out_opt = simulate->add_option("--out", sim_out, "Output directory (overrides config)");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "Run only this seed");
  simulate->add_option("--jobs", sim.jobs, "Parallel runs (default: all cores)");
  simulate->add_option("--format", sim.format, "Summary format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Per-sweep positions from a ranges CSV");
  estimate->add_option("--ranges", est.ranges, "Ranges CSV (t,initiator_id,responder_id,range_m)")
      ->required();
  estimate->add_option("--config,--layout", est.layout, "Layout JSON or run sidecar")->required();
  estimate->add_option("--out", est.out, "Output CSV")->required();
  estimate->add_option("--format", est.format, "Output format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  TrackOptions trk;
  std::string trk_init;
  auto* track = app.add_subcommand("track", "Track a UAV through a directory of lidar frames");
  track->add_option("--frames", trk.frames, "Directory of *.csv / *.bin frames")->required();
  auto* init_opt = track->add_option("--init", trk_init, "Initial state x,y,z[,vx,vy,vz]");
  track->add_option("--out", trk.out, "Output trajectory file")->required();
  track->add_option("--frame-rate", trk.tracker.frame_rate, "Frames per second");
  track->add_option("--k", trk.tracker.k_neighbors, "Neighbors per frame");
  track->add_option("--radius", trk.tracker.max_radius, "Neighbor gate radius (m)");
  track->add_option("--format", trk.format, "Output format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Summarize a simulate output directory");
  report->add_option("--in", rep.in, "Directory written by simulate")->required();
  report->add_option("--out", rep.out, "Summary file")->required();
  report->add_option("--format", rep.format, "Summary format")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (simulate->parsed()) {
    if (*sim_out_opt) sim.out = sim_out;
    if (*sim_seed_opt) sim.seed = sim_seed;
    return cmd_simulate(sim, std::cerr);
  }
  if (estimate->parsed()) return cmd_estimate(est, std::cerr);
  if (track->parsed()) {
    if (*init_opt) trk.init = trk_init;
    return cmd_track(trk, std::cerr);
  }
  return cmd_report(rep, std::cerr);
}
