#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "racegame/geometry.hpp"
#include "racegame/motion.hpp"

namespace racegame {

// Rotated rectangular footprint centred at `center` with the long axis along
// `heading`.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<Vec2, 4> corners() const;
  double circumradius() const;
};

// Car footprint dimensions applied to poses when checking trajectories.
struct BoxShape {
  double length = 0.12;
  double width = 0.05;
};

inline OrientedBox box_at(const CarPose& pose, BoxShape shape) {
  return OrientedBox{{pose.x, pose.y}, pose.heading, shape.length, shape.width};
}

// Signed distance between two boxes: the separation distance when disjoint
// (minimal translation norm to cause contact), minus the penetration depth
// when overlapping (minimal translation norm along the face normals of either
// box that separates them). Zero for touching boxes.
double signed_distance(const OrientedBox& a, const OrientedBox& b);

// Two-phase test: a circumradius broad phase followed by a separating-axis
// narrow phase. Touching boxes do not collide. Equivalent to
// signed_distance(a, b) < 0.
bool pair_collides(const OrientedBox& a, const OrientedBox& b);

// Signed distance per step k = 1..N (the k = 0 states are the given initial
// conditions). Throws ValidationError when the horizons differ.
std::vector<double> trajectory_pair_min_distance(const Trajectory& t1, const Trajectory& t2,
                                                 BoxShape shape);

// Process-wide instrumentation: number of signed_distance evaluations (the
// narrow phase of pair_collides counts too, broad-phase rejections do not).
std::uint64_t signed_distance_call_count();
void reset_signed_distance_call_count();

}  // namespace racegame
