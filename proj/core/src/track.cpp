#include "racegame/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "racegame/errors.hpp"
#include "text_io.hpp"

namespace racegame {

namespace {
constexpr double kMinSegmentLength = 1e-9;
}

TrackModel::TrackModel(std::vector<Vec2> centerline, double halfwidth) {
  if (!centerline.empty() &&
      (centerline.back() - centerline.front()).norm() < kMinSegmentLength) {
    centerline.pop_back();  // explicitly closed input; closure is implicit here
  }
  if (centerline.size() < 3) {
    throw ValidationError("track centerline needs at least 3 distinct points");
  }
  if (halfwidth < 0.0 || !std::isfinite(halfwidth)) {
    throw ValidationError("track halfwidth must be non-negative");
  }
  points_ = std::move(centerline);
  halfwidth_ = halfwidth;

  const std::size_t n = points_.size();
  segments_.resize(n);
  double cum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = points_[i];
    const Vec2 b = points_[(i + 1) % n];
    const double len = (b - a).norm();
    if (len < kMinSegmentLength) {
      std::ostringstream os;
      os << "track centerline segment " << i << " is degenerate (length " << len << ")";
      throw ValidationError(os.str());
    }
    segments_[i] = Segment{a, (b - a) * (1.0 / len), len, cum};
    cum += len;
  }
  total_length_ = cum;

  // Self-intersection at resolution halfwidth: points far apart along the
  // centerline must stay 2*halfwidth apart in the plane, otherwise the track
  // tube overlaps itself. A U-turn at curvature radius halfwidth is the
  // tightest legal bend, so pi*halfwidth of arclength is the comparison
  // cutoff. Checked on sampled centerline points.
  if (halfwidth_ > 0.0) {
    const double arc_cutoff = 3.141592653589793238462643383279 * halfwidth_;
    const double step = std::max(halfwidth_ / 2.0, total_length_ / 4096.0);
    std::vector<double> arcs;
    std::vector<Vec2> samples;
    for (double s = 0.0; s < total_length_; s += step) {
      arcs.push_back(s);
      samples.push_back(point_at(s));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::size_t j = i + 1; j < samples.size(); ++j) {
        const double fwd = arcs[j] - arcs[i];
        const double gap = std::min(fwd, total_length_ - fwd);
        if (gap <= arc_cutoff) continue;
        if ((samples[i] - samples[j]).norm() < 2.0 * halfwidth_) {
          std::ostringstream os;
          os << "track centerline self-intersects at resolution halfwidth: arclengths " << arcs[i]
             << " and " << arcs[j] << " are closer than " << 2.0 * halfwidth_ << " m";
          throw ValidationError(os.str());
        }
      }
    }
  }
}

TrackModel TrackModel::load_csv(const std::string& path, double halfwidth) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open track file '" + path + "'");
  return load_csv(in, halfwidth, path);
}

TrackModel TrackModel::load_csv(std::istream& in, double halfwidth, const std::string& name) {
  if (halfwidth <= 0.0) {
    throw ValidationError("track halfwidth must be positive, got " + std::to_string(halfwidth));
  }
  std::vector<Vec2> pts;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    if (!header_seen) {
      header_seen = true;  // header row is mandatory and otherwise ignored
      continue;
    }
    const auto cols = detail::split(line, ',');
    if (cols.size() != 2) {
      detail::fail_at(name, lineno, "expected 'x,y', got " + std::to_string(cols.size()) + " fields");
    }
    pts.push_back(Vec2{detail::parse_double(cols[0], name, lineno),
                       detail::parse_double(cols[1], name, lineno)});
  }
  if (!header_seen) throw ValidationError(name + ": missing header row");
  if (pts.size() < 3) throw ValidationError(name + ": fewer than 3 centerline points");
  return TrackModel(std::move(pts), halfwidth);
}

Vec2 TrackModel::point_at(double arclength) const {
  double s = std::fmod(arclength, total_length_);
  if (s < 0.0) s += total_length_;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.cum; });
  const Segment& seg = (it == segments_.begin()) ? segments_.front() : *(it - 1);
  return seg.start + seg.dir * (s - seg.cum);
}

double TrackModel::tangent_heading_at(double arclength) const {
  double s = std::fmod(arclength, total_length_);
  if (s < 0.0) s += total_length_;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.cum; });
  const Segment& seg = (it == segments_.begin()) ? segments_.front() : *(it - 1);
  return std::atan2(seg.dir.y, seg.dir.x);
}

double TrackModel::project(Vec2 p) const {
  double best_sq = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (const Segment& seg : segments_) {
    double t = 0.0;
    const Vec2 end = seg.start + seg.dir * seg.length;
    const double d_sq = point_segment_distance_sq(p, seg.start, end, &t);
    // Strict improvement only: scanning in arclength order makes equal-distance
    // ties resolve to the smaller arclength.
    if (d_sq < best_sq) {
      best_sq = d_sq;
      best_s = seg.cum + t * seg.length;
    }
  }
  if (best_s >= total_length_) best_s -= total_length_;
  return best_s;
}

double TrackModel::centerline_distance(Vec2 p) const {
  double best_sq = std::numeric_limits<double>::infinity();
  for (const Segment& seg : segments_) {
    const Vec2 end = seg.start + seg.dir * seg.length;
    best_sq = std::min(best_sq, point_segment_distance_sq(p, seg.start, end));
  }
  return std::sqrt(best_sq);
}

double TrackModel::progress(const CarPose& pose) const {
  return project(Vec2{pose.x, pose.y}) + static_cast<double>(pose.lap) * total_length_;
}

int TrackModel::update_lap_counter(const CarPose& prev, const CarPose& next) const {
  const double chord = (Vec2{next.x, next.y} - Vec2{prev.x, prev.y}).norm();
  if (chord > 0.5 * total_length_) {
    std::ostringstream os;
    os << "single-step displacement " << chord << " m exceeds half the track length ("
       << 0.5 * total_length_ << " m)";
    throw Error(os.str());
  }
  const double s_prev = project(Vec2{prev.x, prev.y});
  const double s_next = project(Vec2{next.x, next.y});
  // Increment on a start-line wrap: the projection drops by more than half a
  // lap. An unqualified "projection decreased" test would also fire on the
  // small backward projection jitter that lateral motion causes near
  // centerline kinks, crediting a phantom lap each time.
  const bool wrapped = s_prev > s_next && (s_prev - s_next) > 0.5 * total_length_;
  return prev.lap + (wrapped ? 1 : 0);
}

TrackModel::StepKind TrackModel::classify_step(double prev_arclength, double next_arclength) const {
  const double d = next_arclength - prev_arclength;
  const double half = 0.5 * total_length_;
  if (d < -half) return StepKind::forward_crossing;
  if (d > half) return StepKind::reverse_crossing;
  return d >= 0.0 ? StepKind::forward : StepKind::backward;
}

}  // namespace racegame
