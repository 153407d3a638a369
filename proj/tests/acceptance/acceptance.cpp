// Acceptance suite. Prints one PASS/FAIL line per criterion; the exit status is
// nonzero if any selected criterion fails.
//
//   uwbcoop_acceptance                 run all criteria
//   uwbcoop_acceptance --criterion N   run only criterion N

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/LU>

#include "uwbcoop/campaign.hpp"
#include "uwbcoop/config.hpp"
#include "uwbcoop/errors.hpp"
#include "uwbcoop/estimator.hpp"
#include "uwbcoop/flightsim.hpp"
#include "uwbcoop/groundtruth.hpp"
#include "uwbcoop/metrics.hpp"

using namespace uwbcoop;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<double> kSeparations{0.6, 1.2, 3.0, 4.0, 12.0, 16.0};

// ---------------------------------------------------------------------------
// Campaign results shared by criteria 4-8.

struct Pooled {
  std::vector<double> pos_xy;
  std::vector<double> pos_z;
  std::vector<double> nav_xy;
};

// Keyed by (separation, trajectory name, feedback).
using PoolKey = std::tuple<double, std::string, FeedbackSource>;

class CampaignCache {
 public:
  const std::map<PoolKey, Pooled>& get() {
    std::call_once(once_, [this] { run(); });
    return pools_;
  }
  double elapsed() const { return elapsed_; }
  std::size_t failures() const { return failures_; }

 private:
  void run() {
    const auto t0 = Clock::now();
    const auto config = reproduction_config();
    const auto plan = plan_campaign(config);
    std::vector<std::optional<FlightRecord>> records(plan.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < plan.size(); i = next++) {
        try {
          records[i] = execute_run(config, plan[i]);
        } catch (const std::exception& e) {
          std::fprintf(stderr, "run %s failed: %s\n", plan[i].run_id.c_str(), e.what());
          ++failures;
        }
      }
    };
    const unsigned n = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> threads;
    for (unsigned k = 0; k < n; ++k) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    for (std::size_t i = 0; i < plan.size(); ++i) {
      if (!records[i]) continue;
      auto& pool = pools_[{plan[i].layout.separation, plan[i].trajectory.name(), plan[i].feedback}];
      const auto pos = positioning_errors(*records[i]);
      const auto nav = navigation_errors(*records[i]);
      for (double v : pos.xy()) pool.pos_xy.push_back(v);
      for (double v : pos.z()) pool.pos_z.push_back(v);
      for (double v : nav.xy()) pool.nav_xy.push_back(v);
    }
    failures_ = failures;
    elapsed_ = seconds_since(t0);
  }

  std::once_flag once_;
  std::map<PoolKey, Pooled> pools_;
  double elapsed_{0.0};
  std::size_t failures_{0};
};

CampaignCache& campaign() {
  static CampaignCache cache;
  return cache;
}

const Pooled& pool(double sep, const std::string& traj, FeedbackSource fb) {
  return campaign().get().at({sep, traj, fb});
}

double median(const std::vector<double>& v) { return box_stats(v).median; }

// ---------------------------------------------------------------------------

Outcome noiseless_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const NoiseModel noiseless{0.0, 0};
  double worst_pos = 0.0;
  double worst_pose = 0.0;
  double worst_yaw = 0.0;
  int failures = 0;
  for (int k = 0; k < 100; ++k) {
    const double sep = kSeparations[k % kSeparations.size()];
    auto responders = square_anchor_layout(sep);
    for (auto& q : responders) q += Vec3(0.1 * sep * u(gen), 0.1 * sep * u(gen), 0.0);
    const Vec3 truth(sep * u(gen), sep * u(gen), 1.0 + 29.0 * std::abs(u(gen)));
    const double yaw = std::numbers::pi * u(gen);
    Rng rng(static_cast<std::uint64_t>(k));

    const TransceiverLayout one{default_initiators(1), responders};
    const auto ms1 = sweep(one, Pose(truth, 0.0), noiseless, 0.0, rng);
    const Vec3 guess = centroid(responders) + Vec3(0, 0, 1);
    try {
      const auto est = solve_position(ms1, responders, guess);
      worst_pos = std::max(worst_pos, (est.position - truth).norm());
    } catch (const Error& e) {
      ++failures;
    }

    const TransceiverLayout two{default_initiators(2), responders};
    const Pose true_pose(truth, yaw);
    const auto ms2 = sweep(two, true_pose, noiseless, 0.0, rng);
    try {
      const auto est = solve_pose(ms2, two, initialize_pose(ms2, two, guess));
      worst_pose = std::max(worst_pose, (est.pose.position - truth).norm());
      worst_yaw = std::max(worst_yaw, std::abs(normalize_angle(est.pose.yaw - yaw)));
    } catch (const Error& e) {
      ++failures;
    }
  }
  const double elapsed = seconds_since(t0);
  const bool pass = failures == 0 && worst_pos < 1e-6 && worst_pose < 1e-6 && worst_yaw < 1e-5 &&
                    elapsed < 5.0;
  return {pass, fmt("worst position %.2e m, pose %.2e m / %.2e rad, %d exceptions, %.2f s",
                    worst_pos, worst_pose, worst_yaw, failures, elapsed)};
}

// Brute-force reference with the search cube re-centered while the answer
// lies on its boundary.
Vec3 reference_minimum(std::span<const RangeMeasurement> ms, std::span<const Vec3> responders,
                       Vec3 center, double half_width, int* recenters) {
  for (int round = 0; round < 10; ++round) {
    const Vec3 r = oracle_position(ms, responders, center, half_width);
    if (((r - center).cwiseAbs().array() < half_width - 0.02).all() || r.z() <= 1e-12) return r;
    center = r;
    ++*recenters;
  }
  return oracle_position(ms, responders, center, half_width);
}

Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> seps{1.2, 3.0, 4.0, 12.0, 16.0};
  double worst = 0.0;
  int recenters = 0;
  int exceptions = 0;
  for (int k = 0; k < 100; ++k) {
    const double sep = seps[k % seps.size()];
    const auto responders = square_anchor_layout(sep);
    const Vec3 truth(sep * (u(gen) - 0.5), sep * (u(gen) - 0.5), 5.0 + 25.0 * u(gen));
    const TransceiverLayout layout{default_initiators(1), responders};
    Rng rng(5000 + static_cast<std::uint64_t>(k));
    const auto ms = sweep(layout, Pose(truth, 0.0), NoiseModel{0.10, 0}, 0.0, rng);
    try {
      const auto est = solve_position(ms, responders, centroid(responders) + Vec3(0, 0, 1));
      const Vec3 ref = reference_minimum(ms, responders, truth, 2.0, &recenters);
      worst = std::max(worst, (est.position - ref).norm());
    } catch (const Error&) {
      ++exceptions;
    }
  }
  const double elapsed = seconds_since(t0);
  const bool pass = exceptions == 0 && worst < 1e-3 && elapsed < 120.0;
  return {pass, fmt("worst |solver - oracle| %.2e m over 100 instances (%d box re-centerings), "
                    "%.1f s",
                    worst, recenters, elapsed)};
}

Outcome jacobian_check() {
  std::mt19937_64 gen(3003);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const TransceiverLayout layout{default_initiators(2), square_anchor_layout(3.0)};
  const std::span<const Vec3> responders(layout.responders);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Pose truth(Vec3(5 * u(gen), 5 * u(gen), 1 + 25 * std::abs(u(gen))), std::numbers::pi * u(gen));
    Rng rng(static_cast<std::uint64_t>(k));
    const auto ms = sweep(layout, truth, NoiseModel{}, 0.0, rng);
    const Pose at(truth.position + Vec3(u(gen), u(gen), u(gen)), truth.yaw + 0.5 * u(gen));

    const auto jp = pose_jacobian(ms, layout, at);
    for (int c = 0; c < 4; ++c) {
      Pose plus = at;
      Pose minus = at;
      if (c < 3) {
        plus.position[c] += h;
        minus.position[c] -= h;
      } else {
        plus.yaw += h;
        minus.yaw -= h;
      }
      const Eigen::VectorXd fd =
          (pose_residuals(ms, layout, plus) - pose_residuals(ms, layout, minus)) / (2 * h);
      for (Eigen::Index r = 0; r < fd.size(); ++r) {
        worst = std::max(worst, std::abs(jp(r, c) - fd(r)) / std::max(1.0, std::abs(fd(r))));
      }
    }

    std::vector<RangeMeasurement> first;
    for (const auto& m : ms) {
      if (m.initiator_id == 0) first.push_back(m);
    }
    const auto jx = position_jacobian(first, responders, at.position);
    for (int c = 0; c < 3; ++c) {
      Vec3 plus = at.position;
      Vec3 minus = at.position;
      plus[c] += h;
      minus[c] -= h;
      const Eigen::VectorXd fd = (position_residuals(first, responders, plus) -
                                  position_residuals(first, responders, minus)) /
                                 (2 * h);
      for (Eigen::Index r = 0; r < fd.size(); ++r) {
        worst = std::max(worst, std::abs(jx(r, c) - fd(r)) / std::max(1.0, std::abs(fd(r))));
      }
    }
  }
  return {worst < 1e-5, fmt("worst relative deviation %.2e at 50 points (both estimators)", worst)};
}

Outcome separation_trend() {
  const auto t0 = Clock::now();
  std::string line = "median xy positioning error:";
  std::vector<double> medians;
  for (double sep : kSeparations) {
    medians.push_back(median(pool(sep, "vertical30", FeedbackSource::uwb).pos_xy));
    line += fmt(" %g m -> %.3f", sep, medians.back());
  }
  bool strictly = true;
  for (std::size_t k = 1; k < medians.size(); ++k) strictly = strictly && medians[k] < medians[k - 1];
  const double elapsed = std::max(seconds_since(t0), campaign().elapsed());
  return {strictly && campaign().failures() == 0 && elapsed < 300.0,
          line + fmt(" (20 seeds, %.1f s)", elapsed)};
}

// Linearized prediction of P(|e_xy| > 1 m) along the vertical climb: the
// Fisher information of four ranges fixes the xy covariance at each height.
double predicted_fraction_above_1m(double sep, double sigma) {
  const auto responders = square_anchor_layout(sep);
  const auto sps = generate_setpoints(Trajectory::vertical(30.0), 0.1);
  double sum = 0.0;
  for (const auto& sp : sps) {
    const Vec3 p = sp.position + Vec3(0, 0, 1e-3);
    Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
    for (const auto& q : responders) {
      const Vec3 u = (p - q).normalized();
      info += u * u.transpose() / (sigma * sigma);
    }
    const Eigen::Matrix2d cov = info.inverse().topLeftCorner<2, 2>();
    const double var = 0.5 * cov.trace();  // isotropic by symmetry
    sum += std::exp(-1.0 / (2.0 * var));
  }
  return sum / static_cast<double>(sps.size());
}

Outcome small_ugv_instability() {
  const auto& p = pool(0.6, "vertical30", FeedbackSource::uwb);
  const double frac = box_stats(p.pos_xy).fraction_above(1.0);
  const double nav_frac = box_stats(p.nav_xy).fraction_above(1.0);
  const double predicted = predicted_fraction_above_1m(0.6, 0.10);
  return {frac >= 0.10 && frac <= 0.35,
          fmt("fraction of positioning xy errors > 1 m at 0.6 m: %.3f, band [0.10, 0.35]; "
              "navigation fraction %.3f; linearized-bound prediction %.3f",
              frac, nav_frac, predicted)};
}

Outcome altitude_asymmetry() {
  bool pass = true;
  std::string line = "median z vs xy:";
  for (double sep : kSeparations) {
    const auto& p = pool(sep, "vertical30", FeedbackSource::uwb);
    const double z = median(p.pos_z);
    const double xy = median(p.pos_xy);
    pass = pass && z < xy;
    line += fmt(" %g m %.3f<%.3f", sep, z, xy);
  }
  return {pass, line};
}

const std::vector<std::string> kSquares{"square8_alt5", "square8_alt10", "square8_alt20"};

Outcome navigation_claim() {
  bool pass = true;
  std::string line = "median navigation xy:";
  for (double sep : {0.6, 1.2, 12.0, 16.0}) {
    line += fmt(" %g m [", sep);
    for (const auto& name : kSquares) {
      const double m = median(pool(sep, name, FeedbackSource::uwb).nav_xy);
      pass = pass && (sep > 10.0 ? m < 0.15 : (m >= 0.05 && m <= 0.6));
      line += fmt(" %.3f", m);
    }
    line += " ]";
  }
  return {pass, line + " (large: < 0.15, small: [0.05, 0.6])"};
}

Outcome navigation_below_positioning() {
  bool pass = true;
  std::string line = "median nav <= pos per layout (square flights):";
  for (double sep : kSeparations) {
    std::vector<double> nav;
    std::vector<double> pos;
    for (const auto& name : kSquares) {
      const auto& p = pool(sep, name, FeedbackSource::uwb);
      nav.insert(nav.end(), p.nav_xy.begin(), p.nav_xy.end());
      pos.insert(pos.end(), p.pos_xy.begin(), p.pos_xy.end());
    }
    const double n = median(nav);
    const double q = median(pos);
    pass = pass && n <= q;
    line += fmt(" %g m %.3f<=%.3f", sep, n, q);
  }
  return {pass, line};
}

Outcome tracker() {
  std::mt19937_64 gen(9009);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Bounds box{Vec3(-30, -30, 0), Vec3(30, 30, 30)};
  double worst = 0.0;
  int losses = 0;
  const int sequences = 20;
  for (int s = 0; s < sequences; ++s) {
    Rng rng(100 + static_cast<std::uint64_t>(s));
    const double speed = 2.0 * (s + 1) / sequences;
    const double heading = std::numbers::pi * u(gen);
    const double turn = 0.3 * u(gen);  // rad/s
    Vec3 pos(5 * u(gen), 5 * u(gen), 10 + 3 * u(gen));
    Vec3 vel(speed * std::cos(heading), speed * std::sin(heading), 0.0);
    TrackState state{pos, vel};
    for (int k = 0; k < 100; ++k) {
      const double a = turn * 0.1;
      vel = Vec3(std::cos(a) * vel.x() - std::sin(a) * vel.y(),
                 std::sin(a) * vel.x() + std::cos(a) * vel.y(), 0.2 * u(gen));
      vel *= speed / vel.norm();
      pos += vel * 0.1;
      const auto frame = synth_cloud(pos, 40, 0.1, 10, box, rng, 1.0, 0.1 * (k + 1));
      try {
        state = track_step(frame, state);
      } catch (const TrackLostError&) {
        ++losses;
        break;
      }
      worst = std::max(worst, (state.position - pos).norm());
    }
  }
  return {losses == 0 && worst < 0.10,
          fmt("%d sequences x 100 frames (<= 2 m/s, 20%% clutter): worst error %.3f m, %d losses",
              sequences, worst, losses)};
}

std::map<std::string, std::string> read_csv_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  auto config = reproduction_config();
  config.layouts.resize(2);  // 0.6 and 1.2 m: the noisiest estimates
  config.seeds = {3, 4};
  const fs::path base = fs::temp_directory_path() / "uwbcoop_acceptance_determinism";
  fs::remove_all(base);
  const auto a = run_campaign(config, base / "a", 1, ReportFormat::csv);
  const auto b = run_campaign(config, base / "b", 4, ReportFormat::csv);
  const auto ta = read_csv_tree(base / "a");
  const auto tb = read_csv_tree(base / "b");
  fs::remove_all(base);
  const bool pass = a.ok() && b.ok() && !ta.empty() && ta == tb;
  return {pass, fmt("%zu CSV files compared byte for byte (1 vs 4 workers): %s", ta.size(),
                    ta == tb ? "identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "noiseless recovery", noiseless_oracle},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "jacobian check", jacobian_check},
      {4, "separation trend", separation_trend},
      {5, "small-UGV instability", small_ugv_instability},
      {6, "altitude asymmetry", altitude_asymmetry},
      {7, "navigation accuracy", navigation_claim},
      {8, "navigation <= positioning", navigation_below_positioning},
      {9, "ground-truth tracker", tracker},
      {10, "determinism", determinism},
  };

  int failed = 0;
  bool matched = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    matched = true;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  if (!matched) {
    std::fprintf(stderr, "no criterion %d\n", only);
    return 2;
  }
  return failed == 0 ? 0 : 1;
}
