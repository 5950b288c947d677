#include "racegame/collision.hpp"

#include <algorithm>
#include <vector>
#include <cmath>
#include <limits>

#include "racegame/errors.hpp"

namespace racegame {

namespace {

// Per-thread so parallel batch races keep independent per-step readings.
thread_local std::uint64_t g_sd_calls = 0;

struct AxisSpan {
  double lo, hi;
};

AxisSpan project_onto(const std::array<Vec2, 4>& corners, Vec2 axis) {
  double lo = corners[0].dot(axis);
  double hi = lo;
  for (int i = 1; i < 4; ++i) {
    const double v = corners[i].dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

// Overlap of the two projections onto `axis`; negative means a separating gap.
double axis_overlap(const std::array<Vec2, 4>& ca, const std::array<Vec2, 4>& cb, Vec2 axis) {
  const AxisSpan sa = project_onto(ca, axis);
  const AxisSpan sb = project_onto(cb, axis);
  return std::min(sa.hi, sb.hi) - std::max(sa.lo, sb.lo);
}

std::array<Vec2, 4> face_normals(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 ax{std::cos(a.heading), std::sin(a.heading)};
  const Vec2 bx{std::cos(b.heading), std::sin(b.heading)};
  return {ax, Vec2{-ax.y, ax.x}, bx, Vec2{-bx.y, bx.x}};
}

}  // namespace

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u = Vec2{std::cos(heading), std::sin(heading)} * (0.5 * length);
  const Vec2 v = Vec2{-std::sin(heading), std::cos(heading)} * (0.5 * width);
  return {center + u + v, center + u - v, center - u - v, center - u + v};
}

double OrientedBox::circumradius() const { return 0.5 * std::hypot(length, width); }

namespace {

// Convex hull (counter-clockwise, no duplicates) of a small point set.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 p, Vec2 q) {
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Vec2 p, Vec2 q) { return p.x == q.x && p.y == q.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Penetration depth of two overlapping boxes: the minimal translation norm
// separating them, i.e. the distance from the origin to the boundary of the
// Minkowski sum b + (-a) (exact for convex polygons, including the corner
// cases that face-normal overlaps overestimate).
double penetration_depth(const std::array<Vec2, 4>& ca, const std::array<Vec2, 4>& cb) {
  std::vector<Vec2> sums;
  sums.reserve(16);
  for (const Vec2& p : cb) {
    for (const Vec2& q : ca) sums.push_back(p - q);
  }
  const std::vector<Vec2> hull = convex_hull(std::move(sums));
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 e0 = hull[i];
    const Vec2 e1 = hull[(i + 1) % hull.size()];
    best_sq = std::min(best_sq, point_segment_distance_sq(Vec2{0.0, 0.0}, e0, e1));
  }
  return std::sqrt(best_sq);
}

}  // namespace

double signed_distance(const OrientedBox& a, const OrientedBox& b) {
  ++g_sd_calls;
  const auto ca = a.corners();
  const auto cb = b.corners();
  bool separated = false;
  for (const Vec2& axis : face_normals(a, b)) {
    if (axis_overlap(ca, cb, axis) <= 0.0) {
      separated = true;
      break;
    }
  }
  if (!separated) {
    return -penetration_depth(ca, cb);
  }
  // Disjoint (or touching): exact distance between the two convex hulls via
  // the sixteen edge pairs.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Vec2 a0 = ca[i];
    const Vec2 a1 = ca[(i + 1) % 4];
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, segment_segment_distance(a0, a1, cb[j], cb[(j + 1) % 4]));
    }
  }
  return best;
}

bool pair_collides(const OrientedBox& a, const OrientedBox& b) {
  const double r = a.circumradius() + b.circumradius();
  if ((a.center - b.center).squared_norm() > r * r) return false;
  ++g_sd_calls;
  const auto ca = a.corners();
  const auto cb = b.corners();
  for (const Vec2& axis : face_normals(a, b)) {
    if (axis_overlap(ca, cb, axis) <= 0.0) return false;
  }
  return true;
}

std::vector<double> trajectory_pair_min_distance(const Trajectory& t1, const Trajectory& t2,
                                                 BoxShape shape) {
  if (t1.horizon() != t2.horizon()) {
    throw ValidationError("trajectory horizons differ: " + std::to_string(t1.horizon()) + " vs " +
                          std::to_string(t2.horizon()));
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(t1.horizon()));
  for (int k = 1; k <= t1.horizon(); ++k) {
    out.push_back(signed_distance(box_at(t1.states[static_cast<std::size_t>(k)], shape),
                                  box_at(t2.states[static_cast<std::size_t>(k)], shape)));
  }
  return out;
}

std::uint64_t signed_distance_call_count() { return g_sd_calls; }

void reset_signed_distance_call_count() { g_sd_calls = 0; }

}  // namespace racegame
