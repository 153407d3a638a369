#include "uwbcoop/groundtruth.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "uwbcoop/csv.hpp"
#include "uwbcoop/errors.hpp"
#include "uwbcoop/kdtree.hpp"

namespace uwbcoop {

void TrackerConfig::validate() const {
  if (!(frame_rate > 0.0)) throw InvalidArgument("frame rate must be positive");
  if (k_neighbors == 0) throw InvalidArgument("k_neighbors must be positive");
  if (!(max_radius > 0.0)) throw InvalidArgument("max_radius must be positive");
}

TrackState track_step(const PointCloudFrame& frame, const TrackState& prev,
                      const TrackerConfig& config) {
  config.validate();
  if (frame.points.empty()) throw InvalidArgument("empty point cloud frame");
  if (!is_finite(prev.position) || !is_finite(prev.velocity)) {
    throw InvalidArgument("track state must be finite");
  }

  const KdTree tree(frame.points);
  const Vec3 predicted = prev.position + prev.velocity / config.frame_rate;
  const auto neighbors = tree.knn(predicted, config.k_neighbors, config.max_radius);
  if (neighbors.empty()) {
    std::ostringstream os;
    os << "no points within " << config.max_radius << " m of predicted position ("
       << predicted.x() << ", " << predicted.y() << ", " << predicted.z() << ")";
    throw TrackLostError(os.str(), predicted);
  }

  Vec3 sum = Vec3::Zero();
  for (const auto& n : neighbors) sum += tree.point(n.index);
  TrackState next;
  next.position = sum / static_cast<double>(neighbors.size());
  next.velocity = (next.position - prev.position) * config.frame_rate;
  return next;
}

std::vector<TrackState> track_sequence(std::span<const PointCloudFrame> frames,
                                       const TrackState& init, const TrackerConfig& config) {
  std::vector<TrackState> out;
  out.reserve(frames.size());
  TrackState state = init;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      state = track_step(frames[i], state, config);
    } catch (const TrackLostError& e) {
      throw TrackLostError("frame " + std::to_string(i) + ": " + e.what(), e.predicted());
    }
    out.push_back(state);
  }
  return out;
}

PointCloudFrame synth_cloud(const Vec3& uav_position, std::size_t n_points, double spread,
                            std::size_t clutter, const Bounds& bounds, Rng& rng,
                            double exclusion_radius, double frame_time) {
  if (n_points == 0) throw InvalidArgument("n_points must be at least 1");
  if (!(spread >= 0.0)) throw InvalidArgument("spread must be non-negative");
  if ((bounds.hi - bounds.lo).minCoeff() <= 0.0 && clutter > 0) {
    throw InvalidArgument("clutter bounds must have positive extent");
  }
  PointCloudFrame frame;
  frame.frame_time = frame_time;
  frame.points.reserve(n_points + clutter);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n_points; ++i) {
    Vec3 p = uav_position;
    if (spread > 0.0) {
      const double gx = gauss(rng);
      const double gy = gauss(rng);
      const double gz = gauss(rng);
      p += spread * Vec3(gx, gy, gz);
    }
    frame.points.push_back(p);
  }
  std::array<std::uniform_real_distribution<double>, 3> uni{
      std::uniform_real_distribution<double>(bounds.lo.x(), bounds.hi.x()),
      std::uniform_real_distribution<double>(bounds.lo.y(), bounds.hi.y()),
      std::uniform_real_distribution<double>(bounds.lo.z(), bounds.hi.z())};
  for (std::size_t i = 0; i < clutter; ++i) {
    Vec3 p;
    int attempts = 0;
    do {
      const double x = uni[0](rng);
      const double y = uni[1](rng);
      const double z = uni[2](rng);
      p = Vec3(x, y, z);
      if (++attempts > 10000) throw InvalidArgument("exclusion zone covers the clutter bounds");
    } while (exclusion_radius > 0.0 && (p - uav_position).norm() < exclusion_radius);
    frame.points.push_back(p);
  }
  return frame;
}

PointCloudFrame read_frame_csv(std::istream& in) {
  PointCloudFrame frame;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    const auto f = csv::split(line);
    if (first) {
      first = false;
      if (f.size() == 3 && f[0] == "x") continue;
    }
    if (f.size() != 3) throw ParseError("expected x,y,z", line_no);
    frame.points.emplace_back(csv::parse_double(f[0], line_no, "x"),
                              csv::parse_double(f[1], line_no, "y"),
                              csv::parse_double(f[2], line_no, "z"));
  }
  return frame;
}

void write_frame_csv(std::ostream& out, const PointCloudFrame& frame) {
  out << "x,y,z\n";
  for (const auto& p : frame.points) {
    out << csv::format(p.x()) << ',' << csv::format(p.y()) << ',' << csv::format(p.z()) << '\n';
  }
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), bytes.size())) throw ParseError("truncated binary frame");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

PointCloudFrame read_frame_binary(std::istream& in) {
  PointCloudFrame frame;
  const auto count = get_le<std::uint32_t>(in);
  frame.points.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const double x = get_le<double>(in);
    const double y = get_le<double>(in);
    const double z = get_le<double>(in);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw ParseError("non-finite point " + std::to_string(i));
    }
    frame.points.emplace_back(x, y, z);
  }
  return frame;
}

void write_frame_binary(std::ostream& out, const PointCloudFrame& frame) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(frame.points.size()));
  for (const auto& p : frame.points) {
    put_le(out, p.x());
    put_le(out, p.y());
    put_le(out, p.z());
  }
}

std::vector<PointCloudFrame> load_frame_directory(const std::filesystem::path& dir,
                                                  double frame_rate) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InvalidArgument("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".bin")) files.push_back(entry.path());
  }
  if (files.empty()) throw InvalidArgument("no frame files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<PointCloudFrame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const bool binary = files[i].extension() == ".bin";
    std::ifstream in(files[i], binary ? std::ios::binary : std::ios::in);
    if (!in) throw InvalidArgument("cannot open " + files[i].string());
    try {
      frames.push_back(binary ? read_frame_binary(in) : read_frame_csv(in));
    } catch (const ParseError& e) {
      throw ParseError(files[i].filename().string() + ": " + e.what());
    }
    frames.back().frame_time = static_cast<double>(i) / frame_rate;
  }
  return frames;
}

}  // namespace uwbcoop
