#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace racegame::testing {

std::vector<StrategyPair> oracle_nash(const Matrix& a, const Matrix& b) {
  std::vector<StrategyPair> out;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      bool nash = true;
      for (int i2 = 0; i2 < a.rows() && nash; ++i2) {
        if (a.at(i2, j) > a.at(i, j)) nash = false;
      }
      for (int j2 = 0; j2 < a.cols() && nash; ++j2) {
        if (b.at(i, j2) > b.at(i, j)) nash = false;
      }
      if (nash) out.push_back({i, j});
    }
  }
  return out;
}

std::vector<StrategyPair> oracle_stackelberg(const Matrix& a, const Matrix& b) {
  const int n = a.rows();
  const int m = a.cols();
  std::vector<double> value(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double bmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) bmax = std::max(bmax, b.at(i, j));
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      if (b.at(i, j) == bmax) worst = std::min(worst, a.at(i, j));
    }
    value[static_cast<std::size_t>(i)] = worst;
  }
  const double vstar = *std::max_element(value.begin(), value.end());
  std::vector<StrategyPair> out;
  for (int i = 0; i < n; ++i) {
    if (value[static_cast<std::size_t>(i)] != vstar) continue;
    double bmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) bmax = std::max(bmax, b.at(i, j));
    for (int j = 0; j < m; ++j) {
      if (b.at(i, j) == bmax) out.push_back({i, j});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StrategyPair> oracle_sequential_max(const std::vector<double>& rows, const Matrix& b) {
  const double best = *std::max_element(rows.begin(), rows.end());
  std::vector<StrategyPair> out;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    if (rows[static_cast<std::size_t>(i)] != best) continue;
    double bmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < b.cols(); ++j) bmax = std::max(bmax, b.at(i, j));
    for (int j = 0; j < b.cols(); ++j) {
      if (b.at(i, j) == bmax) out.push_back({i, j});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StrategyPair> oracle_blocking_pairs(const PairClassification& cls,
                                                StrategyPair coop_stackelberg,
                                                const Matrix& coop_b, double lambda) {
  std::vector<StrategyPair> out;
  const double p1cg = cls.progress1[static_cast<std::size_t>(coop_stackelberg.i)];
  const double p2cg = cls.progress2[static_cast<std::size_t>(coop_stackelberg.j)];
  if (!(p1cg < p2cg)) return out;
  for (int i = 0; i < cls.n; ++i) {
    for (int j = 0; j < cls.m; ++j) {
      if (!(cls.progress1[static_cast<std::size_t>(i)] > cls.progress2[static_cast<std::size_t>(j)])) continue;
      if (!cls.pair_feasible(i, j)) continue;
      bool ok = true;
      for (int jc = 0; jc < cls.m; ++jc) {
        if (cls.progress2[static_cast<std::size_t>(jc)] > cls.progress2[static_cast<std::size_t>(j)] &&
            coop_b.at(i, jc) > lambda) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back({i, j});
    }
  }
  return out;
}

namespace {

bool point_in_box(Vec2 p, const OrientedBox& box) {
  const Vec2 d = p - box.center;
  const double c = std::cos(box.heading);
  const double s = std::sin(box.heading);
  const double lx = c * d.x + s * d.y;
  const double ly = -s * d.x + c * d.y;
  return std::abs(lx) <= 0.5 * box.length && std::abs(ly) <= 0.5 * box.width;
}

Vec2 box_point(const OrientedBox& box, double u, double v) {
  const Vec2 ex = Vec2{std::cos(box.heading), std::sin(box.heading)};
  const Vec2 ey = Vec2{-ex.y, ex.x};
  return box.center + ex * (u * 0.5 * box.length) + ey * (v * 0.5 * box.width);
}

bool any_sample_inside(const OrientedBox& sampled, const OrientedBox& other, int grid) {
  // Corners and edge samples first: they catch shallow corner/edge contacts
  // that an area grid can miss.
  const int edge_samples = 4 * grid;
  for (int e = 0; e < 4; ++e) {
    for (int k = 0; k <= edge_samples; ++k) {
      const double t = -1.0 + 2.0 * k / edge_samples;
      Vec2 p;
      switch (e) {
        case 0: p = box_point(sampled, t, 1.0); break;
        case 1: p = box_point(sampled, t, -1.0); break;
        case 2: p = box_point(sampled, 1.0, t); break;
        default: p = box_point(sampled, -1.0, t); break;
      }
      if (point_in_box(p, other)) return true;
    }
  }
  for (int a = 0; a <= grid; ++a) {
    for (int bidx = 0; bidx <= grid; ++bidx) {
      const double u = -1.0 + 2.0 * a / grid;
      const double v = -1.0 + 2.0 * bidx / grid;
      if (point_in_box(box_point(sampled, u, v), other)) return true;
    }
  }
  return false;
}

}  // namespace

bool oracle_boxes_overlap(const OrientedBox& a, const OrientedBox& b, int grid) {
  return any_sample_inside(a, b, grid) || any_sample_inside(b, a, grid);
}

double oracle_translation_distance(const OrientedBox& a, const OrientedBox& b, int directions) {
  const bool overlapping = oracle_boxes_overlap(a, b);
  const double radii = a.circumradius() + b.circumradius();
  const double center_dist = (a.center - b.center).norm();
  const double reach = center_dist + radii + 0.1;
  constexpr int kSearchGrid = 8;  // corner/edge samples dominate near contact

  auto overlap_at = [&](Vec2 dir, double t) {
    OrientedBox moved = a;
    moved.center = a.center + dir * t;
    return oracle_boxes_overlap(moved, b, kSearchGrid);
  };

  // Smallest translation magnitude along `angle` that flips the overlap
  // state; infinity when the direction cannot flip it. The set of flipping
  // translations is convex, so once bracketed the search is monotone.
  auto contact_magnitude = [&](double angle) {
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    if (overlapping) {
      double lo = 0.0;
      double hi = reach;  // moving a full reach always separates
      for (int iter = 0; iter < 40 && (hi - lo) > 1e-9; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (overlap_at(dir, mid) ? lo : hi) = mid;
      }
      return hi;
    }
    // Disjoint: overlap can only begin once the circumcircles meet.
    const double t_min = std::max(0.0, center_dist - radii);
    const double t_max = std::min(reach, center_dist + radii);
    double t_hit = std::numeric_limits<double>::infinity();
    const int scan = 96;
    for (int k = 0; k <= scan; ++k) {
      const double t = t_min + (t_max - t_min) * k / scan;
      if (overlap_at(dir, t)) {
        t_hit = t;
        break;
      }
    }
    if (!std::isfinite(t_hit)) return std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = t_hit;
    for (int iter = 0; iter < 40 && (hi - lo) > 1e-9; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (overlap_at(dir, mid) ? hi : lo) = mid;
    }
    return hi;
  };

  // Disjoint boxes can only meet along directions within the cone towards b.
  const double center_angle = std::atan2(b.center.y - a.center.y, b.center.x - a.center.x);
  double cone = M_PI;
  if (!overlapping && center_dist > radii) {
    cone = std::asin(std::min(1.0, radii / center_dist)) + 0.15;
  }

  double best = std::numeric_limits<double>::infinity();
  double best_angle = center_angle;
  for (int k = 0; k < directions; ++k) {
    const double angle = center_angle - cone + 2.0 * cone * k / directions;
    const double mag = contact_magnitude(angle);
    if (mag < best) {
      best = mag;
      best_angle = angle;
    }
  }
  double span = 2.0 * cone / directions;
  for (int round = 0; round < 3; ++round) {
    double round_angle = best_angle;
    for (int k = -8; k <= 8; ++k) {
      const double angle = best_angle + span * k / 8.0;
      const double mag = contact_magnitude(angle);
      if (mag < best) {
        best = mag;
        round_angle = angle;
      }
    }
    best_angle = round_angle;
    span /= 8.0;
  }
  return overlapping ? -best : best;
}

CarPose oracle_integrate_primitive(const CarPose& start, double speed, double yaw_rate,
                                   double duration, int steps) {
  double x = start.x;
  double y = start.y;
  double h = start.heading;
  const double dt = duration / steps;
  for (int k = 0; k < steps; ++k) {
    // RK4 on (x, y, h).
    const auto f = [&](double hh) { return std::array<double, 3>{speed * std::cos(hh), speed * std::sin(hh), yaw_rate}; };
    const auto k1 = f(h);
    const auto k2 = f(h + 0.5 * dt * k1[2]);
    const auto k3 = f(h + 0.5 * dt * k2[2]);
    const auto k4 = f(h + dt * k3[2]);
    x += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    y += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    h += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
  }
  CarPose out = start;
  out.x = x;
  out.y = y;
  out.heading = wrap_angle(h);
  return out;
}

double oracle_project_dense(const TrackModel& track, Vec2 p, double resolution) {
  const double total = track.total_length();
  const int samples = static_cast<int>(std::ceil(total / resolution));
  double best = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = total * k / samples;
    const double d = (track.point_at(s) - p).squared_norm();
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  return best_s;
}

}  // namespace racegame::testing
