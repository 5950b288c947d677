#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "racegame/motion.hpp"
#include "racegame/track.hpp"

namespace racegame {

// Grid axes over (x, y, heading, mode). The heading axis is periodic over
// [-pi, pi); the mode axis enumerates the library. `inflation_cells` is the
// under-approximation control: a transition is admissible only when the
// image cell and its face-adjacent x/y neighbors up to that radius are all
// members. `track_margin_m` additionally tightens the in-track constraint
// set by that distance (<= 0 disables tightening).
struct GridSpec {
  double x_min = 0.0;
  double y_min = 0.0;
  double cell_m = 0.02;
  int nx = 0;
  int ny = 0;
  int headings = 16;
  int inflation_cells = 1;
  double track_margin_m = -1.0;  // negative: default to the cell diagonal
  int max_sweeps = 1000;

  // Covers the track tube plus a two-cell pad.
  static GridSpec cover(const TrackModel& track, double cell_m, int headings);
};

// Discrete viability kernel of the track constraint set under the primitive
// automaton: the fixpoint of removing cells with no admissible successor
// inside the current set. Immutable after construction.
class GridKernel {
 public:
  // Throws ValidationError when the grid does not cover the track tube and
  // Error when the fixpoint does not converge within spec.max_sweeps.
  static GridKernel compute(const TrackModel& track, const PrimitiveLibrary& library,
                            GridSpec spec, int threads = 1);

  // Membership of the pose's cell; poses outside the grid are non-members.
  bool contains(const CarPose& pose) const;

  // Branch filter for enumerate_trajectories. The kernel must outlive it.
  PosePruner pruner() const {
    return [this](const CarPose& pose) { return contains(pose); };
  }

  const GridSpec& spec() const { return spec_; }
  int sweeps() const { return sweeps_; }
  bool converged() const { return converged_; }
  std::size_t member_count() const;
  std::size_t cell_count() const { return members_.size(); }

  bool cell_member(int ix, int iy, int ih, int iq) const;
  CarPose cell_center_pose(int ix, int iy, int ih, int iq) const;
  const std::vector<int>& mode_ids() const { return mode_ids_; }

  // Portable text format: axis header plus run-length-encoded membership.
  void save(const std::string& path) const;
  void save(std::ostream& out) const;
  static GridKernel load(const std::string& path);
  static GridKernel load(std::istream& in, const std::string& name = "<stream>");

 private:
  GridKernel() = default;

  std::size_t index(int ix, int iy, int ih, int iq) const {
    return ((static_cast<std::size_t>(iq) * static_cast<std::size_t>(spec_.headings) +
             static_cast<std::size_t>(ih)) *
                static_cast<std::size_t>(spec_.ny) +
            static_cast<std::size_t>(iy)) *
               static_cast<std::size_t>(spec_.nx) +
           static_cast<std::size_t>(ix);
  }

  GridSpec spec_;
  std::vector<int> mode_ids_;       // sorted library ids, the mode axis
  std::vector<std::uint8_t> members_;
  int sweeps_ = 0;
  bool converged_ = false;
};

// Cheap fallback pruner: true iff some admissible mode sequence of length
// `depth` keeps every step's endpoint inside the track.
bool nstep_feasible_prune(const TrackModel& track, const PrimitiveLibrary& library,
                          const CarPose& pose, int depth);

}  // namespace racegame
