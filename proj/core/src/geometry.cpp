#include "racegame/geometry.hpp"

#include <algorithm>

namespace racegame {

double point_segment_distance_sq(Vec2 p, Vec2 a, Vec2 b, double* t_out) {
  const Vec2 ab = b - a;
  const double len_sq = ab.squared_norm();
  double t = 0.0;
  if (len_sq > 0.0) {
    t = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  }
  if (t_out != nullptr) *t_out = t;
  return (p - (a + ab * t)).squared_norm();
}

namespace {

bool proper_intersection(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  const Vec2 da = a1 - a0;
  const Vec2 db = b1 - b0;
  const double d1 = da.cross(b0 - a0);
  const double d2 = da.cross(b1 - a0);
  const double d3 = db.cross(a0 - b0);
  const double d4 = db.cross(a1 - b0);
  return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

}  // namespace

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  if (proper_intersection(a0, a1, b0, b1)) return 0.0;
  double best = point_segment_distance_sq(a0, b0, b1);
  best = std::min(best, point_segment_distance_sq(a1, b0, b1));
  best = std::min(best, point_segment_distance_sq(b0, a0, a1));
  best = std::min(best, point_segment_distance_sq(b1, a0, a1));
  return std::sqrt(best);
}

}  // namespace racegame
