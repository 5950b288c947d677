#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "racegame/geometry.hpp"

namespace racegame {

// Planar car state. `mode` is the id of the motion primitive the car last
// executed (an integer identifier, conceptually embeddable in the reals) and
// `lap` counts completed laps around the track.
struct CarPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  int mode = 0;
  int lap = 0;
};

// Closed race track given by a centerline polyline and a constant halfwidth.
// Immutable after construction; all member functions are const and safe for
// concurrent use.
class TrackModel {
 public:
  // Takes the centerline vertices in driving order. The polyline is closed by
  // connecting the last vertex back to the first (an explicitly repeated
  // first vertex is dropped). Throws ValidationError on degenerate segments,
  // fewer than 3 distinct vertices, negative halfwidth, or a centerline that
  // self-intersects at resolution halfwidth.
  TrackModel(std::vector<Vec2> centerline, double halfwidth);

  // Reads "x,y" rows (meters) with a mandatory header row. Accepts '#'
  // comment lines and blank lines. Errors carry the offending line number.
  static TrackModel load_csv(const std::string& path, double halfwidth);
  static TrackModel load_csv(std::istream& in, double halfwidth,
                             const std::string& name = "<stream>");

  double total_length() const { return total_length_; }
  double halfwidth() const { return halfwidth_; }
  std::size_t segment_count() const { return segments_.size(); }
  const std::vector<Vec2>& centerline() const { return points_; }

  // Centerline point / tangent heading at a (wrapped) arclength.
  Vec2 point_at(double arclength) const;
  double tangent_heading_at(double arclength) const;

  // Arg-min arclength of the Euclidean distance from `p` to the centerline,
  // in [0, total_length()). Ties between segments resolve to the smaller
  // arclength.
  double project(Vec2 p) const;

  double centerline_distance(Vec2 p) const;

  // Closed-set membership: distance to the centerline <= halfwidth.
  bool in_track(Vec2 p) const { return centerline_distance(p) <= halfwidth_; }
  bool in_track(const CarPose& pose) const { return in_track(Vec2{pose.x, pose.y}); }

  // Cumulative progress: projected arclength plus completed laps.
  double progress(const CarPose& pose) const;

  // Lap counter update: returns prev.lap + 1 when the step wraps across the
  // start line (projected arclength drops by more than half a lap), prev.lap
  // otherwise. Throws Error when the chord between the two positions exceeds
  // half the track length (the single-step displacement must stay below half
  // a lap).
  int update_lap_counter(const CarPose& prev, const CarPose& next) const;

  // Classification of a projection step, used for race-log flagging.
  // `backward` and `reverse_crossing` mark steps where the literal lap rule
  // misbehaves (it increments on backward steps and ignores reverse
  // crossings); the simulator logs them instead of second-guessing the rule.
  enum class StepKind { forward, backward, forward_crossing, reverse_crossing };
  StepKind classify_step(double prev_arclength, double next_arclength) const;

 private:
  struct Segment {
    Vec2 start;
    Vec2 dir;  // unit tangent
    double length = 0.0;
    double cum = 0.0;  // arclength at start
  };

  std::vector<Vec2> points_;
  std::vector<Segment> segments_;
  double halfwidth_ = 0.0;
  double total_length_ = 0.0;
};

}  // namespace racegame
