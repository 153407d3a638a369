#include "uwbcoop/commands.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "uwbcoop/csv.hpp"
#include "uwbcoop/errors.hpp"

namespace uwbcoop::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

TrackState parse_init(const std::string& text) {
  const auto f = csv::split(text);
  if (f.size() != 3 && f.size() != 6) {
    throw ConfigError("--init expects x,y,z or x,y,z,vx,vy,vz");
  }
  std::vector<double> v;
  try {
    for (const auto& field : f) v.push_back(csv::parse_double(field, 0, "--init value"));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  TrackState s;
  s.position = Vec3(v[0], v[1], v[2]);
  if (v.size() == 6) s.velocity = Vec3(v[3], v[4], v[5]);
  return s;
}

}  // namespace

std::vector<SweepEstimate> estimate_sweeps(std::span<const RangeMeasurement> measurements,
                                           const LayoutDocument& doc) {
  SweepPositioner positioner(doc.layout, doc.solver, doc.init_lift);
  std::vector<SweepEstimate> out;
  for (const auto& group : group_sweeps(measurements)) {
    out.push_back({group.front().timestamp, positioner.update(group)});
  }
  return out;
}

std::string estimates_to_csv(std::span<const SweepEstimate> estimates) {
  std::ostringstream os;
  os << "t,est_x,est_y,est_z,yaw,residual_rms,iterations,converged\n";
  for (const auto& [t, r] : estimates) {
    os << csv::format(t) << ',' << csv::format(r.position.x()) << ','
       << csv::format(r.position.y()) << ',' << csv::format(r.position.z()) << ','
       << (r.yaw ? csv::format(*r.yaw) : std::string()) << ',' << csv::format(r.residual_rms)
       << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string track_to_csv(std::span<const PointCloudFrame> frames,
                         std::span<const TrackState> states) {
  std::ostringstream os;
  os << "frame,t,x,y,z,vx,vy,vz\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    os << i << ',' << csv::format(frames[i].frame_time) << ',' << csv::format(s.position.x())
       << ',' << csv::format(s.position.y()) << ',' << csv::format(s.position.z()) << ','
       << csv::format(s.velocity.x()) << ',' << csv::format(s.velocity.y()) << ','
       << csv::format(s.velocity.z()) << '\n';
  }
  return os.str();
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
  ExperimentConfig config;
  try {
    config = load_config(opts.config);
    if (opts.seed) config.seeds = {*opts.seed};
    if (opts.out) config.output_dir = *opts.out;
    config.validate();
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  const unsigned jobs = opts.jobs > 0 ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  try {
    const auto result = run_campaign(config, config.output_dir, jobs, opts.format);
    for (const auto& f : result.failures) log << "run failed: " << f << '\n';
    log << "completed " << result.runs - result.failures.size() << "/" << result.runs
        << " runs into " << config.output_dir.string() << '\n';
    return result.ok() ? kExitOk : kExitRuntime;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_estimate(const EstimateOptions& opts, std::ostream& log) {
  LayoutDocument doc;
  std::vector<RangeMeasurement> ms;
  try {
    doc = parse_layout_document(read_json_file(opts.layout));
    std::ifstream in(opts.ranges);
    if (!in) throw ConfigError("cannot open " + opts.ranges.string());
    std::vector<std::size_t> lines;
    ms = read_measurements_csv(in, &lines);
    for (std::size_t k = 0; k < ms.size(); ++k) {
      if (ms[k].responder_id >= doc.layout.num_responders()) {
        throw ParseError("unknown responder id " + std::to_string(ms[k].responder_id), lines[k]);
      }
      if (ms[k].initiator_id >= doc.layout.num_initiators()) {
        throw ParseError("unknown initiator id " + std::to_string(ms[k].initiator_id), lines[k]);
      }
    }
    if (ms.empty()) throw ParseError("no range rows in " + opts.ranges.string());
  } catch (const ParseError& e) {
    log << opts.ranges.string() << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto estimates = estimate_sweeps(ms, doc);
    std::string body;
    if (opts.format == ReportFormat::json) {
      json rows = json::array();
      for (const auto& [t, r] : estimates) {
        json row{{"t", t},
                 {"position", to_json(r.position)},
                 {"residual_rms", r.residual_rms},
                 {"iterations", r.iterations},
                 {"converged", r.converged}};
        if (r.yaw) row["yaw"] = *r.yaw;
        rows.push_back(row);
      }
      body = rows.dump(2) + "\n";
    } else {
      body = estimates_to_csv(estimates);
    }
    json meta;
    meta["ranges"] = opts.ranges.generic_string();
    meta["layout"] = to_json(doc.layout);
    meta["solver"] = to_json(doc.solver);
    meta["init_lift"] = doc.init_lift;
    write_with_sidecar(opts.out, body, meta);
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_track(const TrackOptions& opts, std::ostream& log) {
  if (!opts.init) {
    log << "missing initial state (--init x,y,z[,vx,vy,vz])\n";
    return kExitUsage;
  }
  TrackState init;
  std::vector<PointCloudFrame> frames;
  try {
    init = parse_init(*opts.init);
    opts.tracker.validate();
    frames = load_frame_directory(opts.frames, opts.tracker.frame_rate);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    const auto states = track_sequence(frames, init, opts.tracker);
    json meta;
    meta["frames"] = opts.frames.generic_string();
    meta["frame_count"] = frames.size();
    meta["init"] = {{"position", to_json(init.position)}, {"velocity", to_json(init.velocity)}};
    meta["tracker"] = {{"frame_rate", opts.tracker.frame_rate},
                       {"k_neighbors", opts.tracker.k_neighbors},
                       {"max_radius", opts.tracker.max_radius}};
    if (opts.format == ReportFormat::json) {
      json rows = json::array();
      for (std::size_t i = 0; i < states.size(); ++i) {
        rows.push_back({{"frame", i},
                        {"t", frames[i].frame_time},
                        {"position", to_json(states[i].position)},
                        {"velocity", to_json(states[i].velocity)}});
      }
      write_with_sidecar(opts.out, rows.dump(2) + "\n", meta);
    } else {
      write_with_sidecar(opts.out, track_to_csv(frames, states), meta);
    }
    return kExitOk;
  } catch (const TrackLostError& e) {
    log << "track lost: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_report(const ReportOptions& opts, std::ostream& log) {
  json rows;
  try {
    rows = report_directory(opts.in);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    json meta;
    meta["source"] = opts.in.generic_string();
    meta["runs"] = rows.size();
    const auto body =
        opts.format == ReportFormat::json ? rows.dump(2) + "\n" : summary_to_csv(rows);
    write_with_sidecar(opts.out, body, meta);
    return kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace uwbcoop::cli
