// Reference minimizer for the single-initiator range objective. Deliberately
// written against plain arrays so it shares nothing with the LM code path.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "uwbcoop/errors.hpp"
#include "uwbcoop/estimator.hpp"

namespace uwbcoop {

namespace {

struct Problem {
  std::vector<double> qx, qy, qz, z;

  double cost(const std::array<double, 3>& p) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double dx = p[0] - qx[k];
      const double dy = p[1] - qy[k];
      const double dz = p[2] - qz[k];
      const double r = z[k] - std::sqrt(dx * dx + dy * dy + dz * dz);
      acc += r * r;
    }
    return acc;
  }
};

// Exact-ish minimization of cost along one axis within [lo, hi]: bracket by
// doubling from `h`, then golden-section search.
double line_minimize(const Problem& prob, std::array<double, 3> p, int axis, double lo, double hi,
                     double h) {
  auto f = [&](double v) {
    p[static_cast<std::size_t>(axis)] = v;
    return prob.cost(p);
  };
  const double x0 = p[static_cast<std::size_t>(axis)];
  const double f0 = f(x0);
  double a = std::max(lo, x0 - h);
  double b = std::min(hi, x0 + h);
  if (f(b) < f0) {
    double prev = x0;
    double cur = b;
    double fcur = f(cur);
    while (cur < hi) {
      const double next = std::min(hi, cur + 2.0 * (cur - prev));
      const double fnext = f(next);
      if (fnext >= fcur) {
        a = prev;
        b = next;
        break;
      }
      prev = cur;
      cur = next;
      fcur = fnext;
      a = prev;
      b = cur;
    }
  } else if (f(a) < f0) {
    double prev = x0;
    double cur = a;
    double fcur = f(cur);
    while (cur > lo) {
      const double next = std::max(lo, cur - 2.0 * (prev - cur));
      const double fnext = f(next);
      if (fnext >= fcur) {
        b = prev;
        a = next;
        break;
      }
      prev = cur;
      cur = next;
      fcur = fnext;
      a = cur;
      b = prev;
    }
  }
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  const double best = 0.5 * (a + b);
  return f(best) <= f0 ? best : x0;
}

}  // namespace

Vec3 oracle_position(std::span<const RangeMeasurement> measurements,
                     std::span<const Vec3> responders, const Vec3& search_center,
                     double search_half_width, double resolution) {
  if (!(search_half_width > 0.0) || !(resolution > 0.0)) {
    throw InvalidArgument("oracle box and resolution must be positive");
  }
  Problem prob;
  for (const auto& m : measurements) {
    if (m.responder_id >= responders.size()) throw InvalidArgument("unknown responder id");
    const Vec3& q = responders[m.responder_id];
    prob.qx.push_back(q.x());
    prob.qy.push_back(q.y());
    prob.qz.push_back(q.z());
    prob.z.push_back(m.range);
  }
  const std::size_t nm = prob.z.size();

  const auto n = static_cast<std::size_t>(std::llround(2.0 * search_half_width / resolution)) + 1;
  const double step = 2.0 * search_half_width / static_cast<double>(n - 1);
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  for (int a = 0; a < 3; ++a) {
    lo[static_cast<std::size_t>(a)] = search_center[a] - search_half_width;
    hi[static_cast<std::size_t>(a)] = search_center[a] + search_half_width;
  }
  auto coord = [&](int axis, std::size_t i) {
    return lo[static_cast<std::size_t>(axis)] + step * static_cast<double>(i);
  };

  // Squared per-axis offsets, laid out [measurement][grid index].
  std::vector<double> dx2(nm * n), dy2(nm * n), dz2(nm * n);
  for (std::size_t k = 0; k < nm; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ex = coord(0, i) - prob.qx[k];
      const double ey = coord(1, i) - prob.qy[k];
      const double ez = coord(2, i) - prob.qz[k];
      dx2[k * n + i] = ex * ex;
      dy2[k * n + i] = ey * ey;
      dz2[k * n + i] = ez * ez;
    }
  }

  double best = std::numeric_limits<double>::infinity();
  std::array<std::size_t, 3> best_idx{0, 0, 0};
  std::vector<double> acc(n);
  for (std::size_t ix = 0; ix < n; ++ix) {
    for (std::size_t iy = 0; iy < n; ++iy) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t k = 0; k < nm; ++k) {
        const double hxy = dx2[k * n + ix] + dy2[k * n + iy];
        const double zk = prob.z[k];
        const double* dz = &dz2[k * n];
        for (std::size_t iz = 0; iz < n; ++iz) {
          const double r = zk - std::sqrt(hxy + dz[iz]);
          acc[iz] += r * r;
        }
      }
      for (std::size_t iz = 0; iz < n; ++iz) {
        if (acc[iz] < best) {
          best = acc[iz];
          best_idx = {ix, iy, iz};
        }
      }
    }
  }

  std::array<double, 3> p{coord(0, best_idx[0]), coord(1, best_idx[1]), coord(2, best_idx[2])};

  // Coordinate descent until a full sweep moves the point by less than 1e-10.
  for (int sweep_count = 0; sweep_count < 200000; ++sweep_count) {
    double moved = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const auto ax = static_cast<std::size_t>(axis);
      const double h = std::max(1e-7, std::min(step, 4.0 * moved + 1e-7));
      const double v = line_minimize(prob, p, axis, lo[ax], hi[ax], h);
      moved = std::max(moved, std::abs(v - p[ax]));
      p[ax] = v;
    }
    if (moved < 1e-10) break;
  }
  return Vec3(p[0], p[1], p[2]);
}

}  // namespace uwbcoop
