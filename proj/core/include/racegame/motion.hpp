#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "racegame/track.hpp"

namespace racegame {

// One constant-velocity mode: the car holds (speed, yaw_rate) for `duration`
// seconds, tracing a straight (yaw_rate == 0) or a circular arc.
struct MotionPrimitive {
  int id = 0;
  double speed = 0.0;      // m/s
  double yaw_rate = 0.0;   // rad/s
  double duration = 0.0;   // s
};

// Library of motion primitives plus the concatenation automaton U(q): the set
// of modes that may follow mode q, encoding acceleration limits. Immutable
// after construction.
class PrimitiveLibrary {
 public:
  PrimitiveLibrary(std::vector<MotionPrimitive> primitives,
                   std::vector<std::vector<int>> successor_ids);

  // One primitive per (speed, yaw_rate) grid pair; ids assigned row-major in
  // grid order. q -> q' is admissible iff |dv| <= accel_limit*duration and
  // |dw| <= yaw_accel_limit*duration (self-loops always qualify).
  static PrimitiveLibrary generate(const std::vector<double>& speed_grid,
                                   const std::vector<double>& yaw_rate_grid,
                                   double accel_limit, double yaw_accel_limit,
                                   double duration);

  // Line-oriented text format, one `prim <id> <speed> <yaw_rate> <duration>
  // <n_succ> <succ ids...>` row per primitive. Round-trips exactly.
  static PrimitiveLibrary load(const std::string& path);
  static PrimitiveLibrary load(std::istream& in, const std::string& name = "<stream>");
  void save(const std::string& path) const;
  void save(std::ostream& out) const;

  std::size_t size() const { return primitives_.size(); }
  double duration() const { return duration_; }
  const MotionPrimitive& primitive(std::size_t index) const { return primitives_[index]; }
  const std::vector<MotionPrimitive>& primitives() const { return primitives_; }

  // Index lookup by mode id; throws ValidationError for unknown ids.
  std::size_t index_of(int id) const;
  bool has_id(int id) const;

  // Successor indices (into primitives()), sorted by mode id.
  std::span<const int> successors(std::size_t index) const { return successors_[index]; }

  // Maximal-deceleration admissible successor: minimal speed, ties toward
  // zero yaw rate, then smaller id.
  std::size_t braking_successor(std::size_t index) const;

  // A copy whose primitives (and automaton) are restricted to speeds <= cap.
  // Throws ValidationError if nothing survives.
  PrimitiveLibrary speed_capped(double max_speed) const;

 private:
  void validate() const;

  std::vector<MotionPrimitive> primitives_;    // sorted by id
  std::vector<std::vector<int>> successors_;   // indices, sorted by id
  double duration_ = 0.0;
};

// Rolled-out state sequence: states.size() == modes.size() + 1 and
// states[k+1] == step_primitive(states[k], modes[k]). `owner` tags the player
// (0 or 1) the trajectory was enumerated for.
struct Trajectory {
  std::vector<CarPose> states;
  std::vector<int> modes;  // primitive ids, one per step
  int owner = 0;

  int horizon() const { return static_cast<int>(modes.size()); }
  const CarPose& terminal() const { return states.back(); }
};

// Advances a pose by one primitive: straight for yaw_rate == 0, otherwise an
// arc of radius speed/yaw_rate. The lap counter is updated against `track`.
CarPose step_primitive(const CarPose& pose, const MotionPrimitive& prim, const TrackModel& track);

// Branch filter used by enumerate_trajectories; returns false to cut a branch.
using PosePruner = std::function<bool(const CarPose&)>;

// Depth-first rollout of every automaton-admissible mode sequence of length
// `horizon` starting from `start` (whose mode id must exist in the library).
// The result is ordered lexicographically by mode-id sequence; the indices of
// the returned vector are the strategy space of the owning player. A supplied
// pruner cuts branches whose next state it rejects; the pruned list is a
// subsequence of the unpruned one. May return an empty vector.
std::vector<Trajectory> enumerate_trajectories(const CarPose& start,
                                               const PrimitiveLibrary& library, int horizon,
                                               const TrackModel& track,
                                               const PosePruner& pruner = {}, int owner = 0);

// Number of admissible mode sequences of length `horizon` from `start_mode_id`
// (no pruning), computed by dynamic programming without materializing them.
std::uint64_t count_trajectories(int start_mode_id, const PrimitiveLibrary& library, int horizon);

}  // namespace racegame
