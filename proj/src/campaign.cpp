#include "uwbcoop/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "uwbcoop/csv.hpp"
#include "uwbcoop/errors.hpp"

namespace uwbcoop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kFractionThreshold = 1.0;  // m, the "error over 1 m" statistic

json run_metadata(const ExperimentConfig& config, const RunSpec& spec, const FlightRecord& rec) {
  json meta;
  meta["run_id"] = spec.run_id;
  meta["seed"] = spec.seed;
  meta["feedback"] = to_string(spec.feedback);
  meta["trajectory"] = to_json(spec.trajectory);
  meta["layout"] = to_json(rec.layout);
  meta["layout"]["label"] = spec.layout.label;
  meta["layout"]["separation"] = spec.layout.separation;
  meta["noise"] = {{"sigma", rec.noise.sigma},
                   {"seed", rec.noise.seed},
                   {"outlier_probability", rec.noise.outlier_probability},
                   {"outlier_sigma", rec.noise.outlier_sigma}};
  meta["solver"] = to_json(rec.config.solver);
  meta["init_lift"] = rec.config.init_lift;
  meta["dt"] = rec.dt;
  meta["config"] = config.to_json();
  return meta;
}

}  // namespace

std::vector<RunSpec> plan_campaign(const ExperimentConfig& config) {
  std::vector<RunSpec> runs;
  for (const auto& layout : config.layouts) {
    for (const auto& traj : config.trajectories) {
      for (auto seed : config.seeds) {
        for (auto fb : config.feedback) {
          RunSpec r;
          r.index = runs.size();
          r.layout = layout;
          r.trajectory = traj;
          r.seed = seed;
          r.feedback = fb;
          r.run_id = layout.label + "_" + traj.name() + "_seed" + std::to_string(seed) + "_" +
                     to_string(fb);
          runs.push_back(std::move(r));
        }
      }
    }
  }
  return runs;
}

FlightRecord execute_run(const ExperimentConfig& config, const RunSpec& spec) {
  TransceiverLayout layout{config.initiators, spec.layout.responders};
  NoiseModel noise{config.sigma, spec.seed, config.outlier_probability, config.outlier_sigma};
  return run_flight(spec.trajectory, layout, noise, spec.feedback, config.flight);
}

void atomic_write(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_with_sidecar(const fs::path& path, const std::string& content, const json& meta) {
  atomic_write(path, content);
  fs::path side = path;
  side += ".json";
  atomic_write(side, meta.dump(2) + "\n");
}

json to_json(const BoxStats& b) {
  return {{"median", b.median},
          {"q1", b.q1},
          {"q3", b.q3},
          {"whisker_low", b.whisker_low},
          {"whisker_high", b.whisker_high},
          {"mean", b.mean},
          {"min", b.min},
          {"max", b.max},
          {"count", b.count},
          {"fraction_above_1m", b.fraction_above(kFractionThreshold)}};
}

json run_summary(const RunSpec& spec, const FlightRecord& record) {
  json row;
  row["run_id"] = spec.run_id;
  row["layout"] = spec.layout.label;
  row["separation_m"] = spec.layout.separation;
  row["trajectory"] = spec.trajectory.name();
  row["seed"] = spec.seed;
  row["feedback"] = to_string(spec.feedback);
  if (record.has_estimates()) {
    const auto pos = positioning_errors(record);
    row["positioning"] = {{"xy", to_json(box_stats(pos.xy()))}, {"z", to_json(box_stats(pos.z()))}};
  }
  const auto nav = navigation_errors(record);
  if (!nav.samples.empty()) row["navigation"] = {{"xy", to_json(box_stats(nav.xy()))}};
  return row;
}

void append_error_rows(std::ostream& out, const std::string& run_id, double separation,
                       const ErrorSeries& series) {
  const auto kind = to_string(series.kind);
  const auto sep = csv::format(separation);
  for (const auto& s : series.samples) {
    out << run_id << ',' << sep << ',' << kind << ",xy," << csv::format(s.t) << ','
        << csv::format(s.xy) << '\n';
  }
  for (const auto& s : series.samples) {
    if (!s.z) continue;
    out << run_id << ',' << sep << ',' << kind << ",z," << csv::format(s.t) << ','
        << csv::format(*s.z) << '\n';
  }
}

std::string summary_to_csv(const json& rows) {
  std::ostringstream os;
  os << "run_id,layout,separation_m,trajectory,seed,feedback,kind,axis,count,median,q1,q3,"
        "whisker_low,whisker_high,mean,min,max,fraction_above_1m\n";
  for (const auto& row : rows) {
    for (const char* kind : {"positioning", "navigation"}) {
      if (!row.contains(kind)) continue;
      for (const auto& [axis, b] : row.at(kind).items()) {
        os << row.at("run_id").get<std::string>() << ',' << row.at("layout").get<std::string>()
           << ',' << csv::format(row.at("separation_m").get<double>()) << ','
           << row.at("trajectory").get<std::string>() << ',' << row.at("seed").get<std::uint64_t>()
           << ',' << row.at("feedback").get<std::string>() << ',' << kind << ',' << axis << ','
           << b.at("count").get<std::size_t>();
        for (const char* f : {"median", "q1", "q3", "whisker_low", "whisker_high", "mean", "min",
                              "max", "fraction_above_1m"}) {
          os << ',' << csv::format(b.at(f).get<double>());
        }
        os << '\n';
      }
    }
  }
  return os.str();
}

CampaignResult run_campaign(const ExperimentConfig& config, const fs::path& out, unsigned jobs,
                            ReportFormat format) {
  config.validate();
  const auto runs = plan_campaign(config);
  fs::create_directories(out / "runs");

  std::vector<json> summaries(runs.size());
  std::vector<std::string> errors(runs.size());
  std::vector<fs::path> parts(runs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto& spec = runs[i];
      try {
        const auto rec = execute_run(config, spec);
        const auto meta = run_metadata(config, spec, rec);
        const fs::path base = out / "runs" / spec.run_id;

        std::ostringstream flight;
        write_flight_csv(flight, rec);
        write_with_sidecar(fs::path(base) += ".csv", flight.str(), meta);
        if (!rec.ranges.empty()) {
          std::ostringstream ranges;
          write_measurements_csv(ranges, rec.ranges);
          write_with_sidecar(fs::path(base) += "_ranges.csv", ranges.str(), meta);
        }

        std::ostringstream rows;
        if (rec.has_estimates()) {
          append_error_rows(rows, spec.run_id, spec.layout.separation, positioning_errors(rec));
        }
        append_error_rows(rows, spec.run_id, spec.layout.separation, navigation_errors(rec));
        parts[i] = fs::path(base) += "_errors.part";
        atomic_write(parts[i], rows.str());
        summaries[i] = run_summary(spec, rec);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  jobs = std::max(1u, jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::min<std::size_t>(jobs, runs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  CampaignResult result;
  result.runs = runs.size();
  json summary_rows = json::array();
  json failed = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!errors[i].empty()) {
      result.failures.push_back(runs[i].run_id + ": " + errors[i]);
      failed.push_back({{"run_id", runs[i].run_id}, {"error", errors[i]}});
    } else {
      summary_rows.push_back(summaries[i]);
    }
  }

  // Stitch per-run error tables together in plan order.
  {
    const fs::path errors_csv = out / "errors.csv";
    fs::path tmp = errors_csv;
    tmp += ".tmp";
    {
      std::ofstream dst(tmp, std::ios::binary | std::ios::trunc);
      dst << "run_id,separation_m,kind,axis,t,error_m\n";
      for (const auto& p : parts) {
        if (p.empty()) continue;
        std::ifstream src(p, std::ios::binary);
        dst << src.rdbuf();
      }
    }
    fs::rename(tmp, errors_csv);
    for (const auto& p : parts) {
      if (!p.empty()) fs::remove(p);
    }
  }

  json meta;
  meta["config"] = config.to_json();
  meta["seeds"] = config.seeds;
  meta["runs"] = runs.size();
  meta["failed"] = failed;
  {
    fs::path side = out / "errors.csv";
    side += ".json";
    atomic_write(side, meta.dump(2) + "\n");
  }
  if (format == ReportFormat::json) {
    write_with_sidecar(out / "summary.json", summary_rows.dump(2) + "\n", meta);
  } else {
    write_with_sidecar(out / "summary.csv", summary_to_csv(summary_rows), meta);
  }
  return result;
}

FlightRecord read_flight_record(const fs::path& csv_path) {
  fs::path side = csv_path;
  side += ".json";
  std::ifstream meta_in(side);
  if (!meta_in) throw ParseError("missing metadata sidecar " + side.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw ParseError(side.string() + ": " + e.what());
  }

  FlightRecord rec;
  try {
    rec.trajectory = trajectory_from_json(meta.at("trajectory"));
    const auto doc = parse_layout_document(meta);
    rec.layout = doc.layout;
    rec.config.solver = doc.solver;
    rec.feedback =
        meta.at("feedback").get<std::string>() == "uwb" ? FeedbackSource::uwb : FeedbackSource::truth;
    rec.dt = meta.at("dt").get<double>();
    rec.noise.sigma = meta.at("noise").at("sigma").get<double>();
    rec.noise.seed = meta.at("noise").at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(side.string() + ": " + e.what());
  }

  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || csv::is_skippable(line)) continue;
    const auto f = csv::split(line);
    if (f.size() != 11) throw ParseError("expected 11 fields", line_no);
    auto num = [&](std::size_t i, const char* what) { return csv::parse_double(f[i], line_no, what); };
    FlightSample s;
    s.t = num(0, "t");
    s.true_pose.position = Vec3(num(1, "true_x"), num(2, "true_y"), num(3, "true_z"));
    s.true_pose.yaw = num(4, "yaw");
    if (!f[5].empty()) s.estimate = Vec3(num(5, "est_x"), num(6, "est_y"), num(7, "est_z"));
    s.setpoint = Vec3(num(8, "sp_x"), num(9, "sp_y"), num(10, "sp_z"));
    rec.samples.push_back(s);
  }
  return rec;
}

json report_directory(const fs::path& dir) {
  const fs::path runs_dir = dir / "runs";
  if (!fs::is_directory(runs_dir)) throw InvalidArgument("no runs/ directory under " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(runs_dir)) {
    const auto name = e.path().filename().string();
    if (e.path().extension() == ".csv" && name.find("_ranges") == std::string::npos) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  json rows = json::array();
  for (const auto& f : files) {
    fs::path side = f;
    side += ".json";
    std::ifstream meta_in(side);
    const json meta = json::parse(meta_in);
    const auto rec = read_flight_record(f);
    RunSpec spec;
    spec.run_id = meta.at("run_id").get<std::string>();
    spec.layout.label = meta.at("layout").at("label").get<std::string>();
    spec.layout.separation = meta.at("layout").at("separation").get<double>();
    spec.trajectory = rec.trajectory;
    spec.seed = meta.at("seed").get<std::uint64_t>();
    spec.feedback = rec.feedback;
    rows.push_back(run_summary(spec, rec));
  }
  return rows;
}

}  // namespace uwbcoop
