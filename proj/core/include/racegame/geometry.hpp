#pragma once

#include <cmath>

namespace racegame {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  constexpr double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }

  Vec2 rotated(double angle) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

// Wraps an angle to [-pi, pi).
inline double wrap_angle(double a) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  a = std::fmod(a + 3.141592653589793238462643383279, two_pi);
  if (a < 0.0) a += two_pi;
  return a - 3.141592653589793238462643383279;
}

// Squared distance from p to segment [a,b]; if t_out is non-null it receives
// the clamped parameter of the closest point, a + t*(b-a).
double point_segment_distance_sq(Vec2 p, Vec2 a, Vec2 b, double* t_out = nullptr);

double segment_segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

}  // namespace racegame
