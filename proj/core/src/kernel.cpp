#include "racegame/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "racegame/errors.hpp"
#include "text_io.hpp"

namespace racegame {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

// Heading cells are centered on multiples of 2*pi/headings so that the
// cardinal directions sit at cell centers.
int heading_cell(double heading, int headings) {
  const double w = wrap_angle(heading);
  int h = static_cast<int>(std::floor((w + kPi) / (2.0 * kPi) * headings + 0.5));
  if (h >= headings) h -= headings;
  if (h < 0) h = 0;
  return h;
}

double heading_center(int ih, int headings) {
  return -kPi + static_cast<double>(ih) * 2.0 * kPi / headings;
}

// Image cover of a transition: translating a whole cell by the primitive
// displacement lands in a 1x1, 1x2, 2x1 or 2x2 block of cells. The offsets
// are relative to the source cell index; nx2/ny2 flag the second column/row.
struct Transition {
  int ox = 0;
  int oy = 0;
  bool two_x = false;
  bool two_y = false;
  int target_heading = 0;
  int target_mode = 0;
};

}  // namespace

GridSpec GridSpec::cover(const TrackModel& track, double cell_m, int headings) {
  if (cell_m <= 0.0) throw ValidationError("grid cell size must be positive");
  if (headings < 1) throw ValidationError("grid needs at least one heading cell");
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const Vec2& p : track.centerline()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double pad = track.halfwidth() + 2.0 * cell_m;
  GridSpec spec;
  spec.cell_m = cell_m;
  spec.headings = headings;
  spec.x_min = x0 - pad;
  spec.y_min = y0 - pad;
  spec.nx = static_cast<int>(std::ceil((x1 - x0 + 2.0 * pad) / cell_m));
  spec.ny = static_cast<int>(std::ceil((y1 - y0 + 2.0 * pad) / cell_m));
  return spec;
}

GridKernel GridKernel::compute(const TrackModel& track, const PrimitiveLibrary& library,
                               GridSpec spec, int threads) {
  if (spec.nx <= 0 || spec.ny <= 0 || spec.headings <= 0) {
    throw ValidationError("grid spec has empty axes");
  }
  if (spec.track_margin_m < 0.0) {
    // Half the cell diagonal: a center this far inside the tube keeps the
    // whole cell inside. In-cell position across steps is handled by the
    // transition image cover, not the margin.
    spec.track_margin_m = spec.cell_m * std::sqrt(2.0) * 0.5;
  }
  {
    // The grid must cover the track tube.
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    for (const Vec2& p : track.centerline()) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const double hw = track.halfwidth();
    if (x0 - hw < spec.x_min || y0 - hw < spec.y_min ||
        x1 + hw > spec.x_min + spec.nx * spec.cell_m ||
        y1 + hw > spec.y_min + spec.ny * spec.cell_m) {
      throw ValidationError("grid does not cover the track bounding box");
    }
  }

  GridKernel kernel;
  kernel.spec_ = spec;
  kernel.mode_ids_.reserve(library.size());
  for (const auto& p : library.primitives()) kernel.mode_ids_.push_back(p.id);

  const int nx = spec.nx;
  const int ny = spec.ny;
  const int nh = spec.headings;
  const int nq = static_cast<int>(library.size());
  const std::size_t xy = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  const std::size_t total = xy * static_cast<std::size_t>(nh) * static_cast<std::size_t>(nq);

  // Constraint set: cell centers within the (tightened) track tube. The mask
  // is heading/mode independent.
  std::vector<std::uint8_t> in_track_xy(xy, 0);
  const double limit = track.halfwidth() - spec.track_margin_m;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 c{spec.x_min + (ix + 0.5) * spec.cell_m, spec.y_min + (iy + 0.5) * spec.cell_m};
      in_track_xy[static_cast<std::size_t>(iy) * nx + ix] =
          (limit >= 0.0 && track.centerline_distance(c) <= limit) ? 1 : 0;
    }
  }

  // Under-approximation bias: an admissible transition must land on a cell
  // whose face-adjacent neighborhood (radius = inflation_cells) lies entirely
  // inside the constraint set, which erodes the usable tube rather than the
  // fixpoint iterate (eroding the iterate would peel any neutrally stable
  // system down to nothing, one cell per sweep).
  const int r = std::max(0, spec.inflation_cells);
  std::vector<std::uint8_t> core_xy(xy, 0);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      bool ok = ix - r >= 0 && ix + r < nx && iy - r >= 0 && iy + r < ny;
      for (int k = 1; k <= r && ok; ++k) {
        const std::size_t base = static_cast<std::size_t>(iy) * nx + ix;
        ok = in_track_xy[base - static_cast<std::size_t>(k)] != 0 &&
             in_track_xy[base + static_cast<std::size_t>(k)] != 0 &&
             in_track_xy[base - static_cast<std::size_t>(k) * nx] != 0 &&
             in_track_xy[base + static_cast<std::size_t>(k) * nx] != 0;
      }
      core_xy[static_cast<std::size_t>(iy) * nx + ix] =
          (ok && in_track_xy[static_cast<std::size_t>(iy) * nx + ix] != 0) ? 1 : 0;
    }
  }

  std::vector<std::uint8_t> cur(total);
  for (int iq = 0; iq < nq; ++iq) {
    for (int ih = 0; ih < nh; ++ih) {
      std::uint8_t* dst = cur.data() + (static_cast<std::size_t>(iq) * nh + ih) * xy;
      std::copy(in_track_xy.begin(), in_track_xy.end(), dst);
    }
  }

  // Transition table per (mode, heading, successor); displacements evaluated
  // once at cell-center headings.
  std::vector<std::vector<Transition>> transitions(static_cast<std::size_t>(nq) * nh);
  for (int iq = 0; iq < nq; ++iq) {
    for (int ih = 0; ih < nh; ++ih) {
      auto& list = transitions[static_cast<std::size_t>(iq) * nh + ih];
      const double h0 = heading_center(ih, nh);
      for (int s : library.successors(static_cast<std::size_t>(iq))) {
        const MotionPrimitive& prim = library.primitive(static_cast<std::size_t>(s));
        double dx = 0.0;
        double dy = 0.0;
        double h1 = h0;
        if (prim.yaw_rate == 0.0) {
          dx = prim.speed * prim.duration * std::cos(h0);
          dy = prim.speed * prim.duration * std::sin(h0);
        } else {
          const double r = prim.speed / prim.yaw_rate;
          h1 = h0 + prim.yaw_rate * prim.duration;
          dx = r * (std::sin(h1) - std::sin(h0));
          dy = -r * (std::cos(h1) - std::cos(h0));
        }
        Transition t;
        const double fx = dx / spec.cell_m;
        const double fy = dy / spec.cell_m;
        t.ox = static_cast<int>(std::floor(fx));
        t.oy = static_cast<int>(std::floor(fy));
        const double rx = fx - std::floor(fx);
        const double ry = fy - std::floor(fy);
        constexpr double kSnap = 1e-9;  // exact-multiple displacements cover one cell
        if (rx >= 1.0 - kSnap) ++t.ox;
        if (ry >= 1.0 - kSnap) ++t.oy;
        t.two_x = rx > kSnap && rx < 1.0 - kSnap;
        t.two_y = ry > kSnap && ry < 1.0 - kSnap;
        t.target_heading = heading_cell(h1, nh);
        t.target_mode = s;
        list.push_back(t);
      }
    }
  }

  std::vector<std::uint8_t> next(total);
  const int hw_threads = std::max(1, threads);

  auto sweep_range = [&](int q_begin, int q_end, std::size_t* removed) {
    std::size_t local_removed = 0;
    for (int iq = q_begin; iq < q_end; ++iq) {
      for (int ih = 0; ih < nh; ++ih) {
        const auto& list = transitions[static_cast<std::size_t>(iq) * nh + ih];
        const std::size_t plane = (static_cast<std::size_t>(iq) * nh + ih) * xy;
        for (int iy = 0; iy < ny; ++iy) {
          for (int ix = 0; ix < nx; ++ix) {
            const std::size_t idx = plane + static_cast<std::size_t>(iy) * nx + ix;
            if (cur[idx] == 0) {
              next[idx] = 0;
              continue;
            }
            bool viable = false;
            for (const Transition& t : list) {
              const int tx = ix + t.ox;
              const int ty = iy + t.oy;
              const int tx1 = tx + (t.two_x ? 1 : 0);
              const int ty1 = ty + (t.two_y ? 1 : 0);
              if (tx < 0 || tx1 >= nx || ty < 0 || ty1 >= ny) continue;
              const std::size_t tplane =
                  (static_cast<std::size_t>(t.target_mode) * nh + t.target_heading) * xy;
              // Every cell the translated source cell can land in must be a
              // member with the constraint-side margin.
              bool ok = true;
              for (int cx = tx; cx <= tx1 && ok; ++cx) {
                for (int cy = ty; cy <= ty1 && ok; ++cy) {
                  const std::size_t cxy = static_cast<std::size_t>(cy) * nx + cx;
                  ok = core_xy[cxy] != 0 && cur[tplane + cxy] != 0;
                }
              }
              if (ok) {
                viable = true;
                break;
              }
            }
            next[idx] = viable ? 1 : 0;
            if (!viable) ++local_removed;
          }
        }
      }
    }
    *removed = local_removed;
  };

  int sweeps = 0;
  bool converged = false;
  while (sweeps < spec.max_sweeps) {
    ++sweeps;
    std::size_t removed = 0;
    if (hw_threads == 1 || nq == 1) {
      sweep_range(0, nq, &removed);
    } else {
      const int workers = std::min(hw_threads, nq);
      std::vector<std::thread> pool;
      std::vector<std::size_t> removed_per(static_cast<std::size_t>(workers), 0);
      for (int w = 0; w < workers; ++w) {
        const int q0 = nq * w / workers;
        const int q1 = nq * (w + 1) / workers;
        pool.emplace_back(sweep_range, q0, q1, &removed_per[static_cast<std::size_t>(w)]);
      }
      for (auto& th : pool) th.join();
      for (std::size_t v : removed_per) removed += v;
    }
    cur.swap(next);
    if (removed == 0) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error("viability kernel did not converge within " + std::to_string(spec.max_sweeps) +
                " sweeps");
  }
  kernel.members_ = std::move(cur);
  kernel.sweeps_ = sweeps;
  kernel.converged_ = true;
  return kernel;
}

bool GridKernel::contains(const CarPose& pose) const {
  const int ix = static_cast<int>(std::floor((pose.x - spec_.x_min) / spec_.cell_m));
  const int iy = static_cast<int>(std::floor((pose.y - spec_.y_min) / spec_.cell_m));
  if (ix < 0 || ix >= spec_.nx || iy < 0 || iy >= spec_.ny) return false;
  const int ih = heading_cell(pose.heading, spec_.headings);
  const auto it = std::lower_bound(mode_ids_.begin(), mode_ids_.end(), pose.mode);
  if (it == mode_ids_.end() || *it != pose.mode) return false;
  const int iq = static_cast<int>(it - mode_ids_.begin());
  return members_[index(ix, iy, ih, iq)] != 0;
}

std::size_t GridKernel::member_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : members_) n += v;
  return n;
}

bool GridKernel::cell_member(int ix, int iy, int ih, int iq) const {
  return members_[index(ix, iy, ih, iq)] != 0;
}

CarPose GridKernel::cell_center_pose(int ix, int iy, int ih, int iq) const {
  CarPose pose;
  pose.x = spec_.x_min + (ix + 0.5) * spec_.cell_m;
  pose.y = spec_.y_min + (iy + 0.5) * spec_.cell_m;
  pose.heading = heading_center(ih, spec_.headings);
  pose.mode = mode_ids_[static_cast<std::size_t>(iq)];
  return pose;
}

void GridKernel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write kernel '" + path + "'");
  save(out);
}

void GridKernel::save(std::ostream& out) const {
  out << "racegame-kernel 1\n";
  out.precision(17);
  out << "grid " << spec_.x_min << " " << spec_.y_min << " " << spec_.cell_m << " " << spec_.nx
      << " " << spec_.ny << " " << spec_.headings << "\n";
  out << "params " << spec_.inflation_cells << " " << spec_.track_margin_m << " " << sweeps_ << " "
      << (converged_ ? 1 : 0) << "\n";
  out << "modes " << mode_ids_.size();
  for (int id : mode_ids_) out << " " << id;
  out << "\n";
  // Run-length encoding, starting with a (possibly empty) run of zeros.
  out << "rle";
  std::size_t pos = 0;
  std::uint8_t value = 0;
  while (pos < members_.size()) {
    std::size_t run = 0;
    while (pos + run < members_.size() && members_[pos + run] == value) ++run;
    out << " " << run;
    pos += run;
    value = static_cast<std::uint8_t>(1 - value);
  }
  out << "\n";
}

GridKernel GridKernel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open kernel '" + path + "'");
  return load(in, path);
}

GridKernel GridKernel::load(std::istream& in, const std::string& name) {
  GridKernel k;
  std::string line;
  int lineno = 0;
  bool magic = false, grid = false, params = false, modes = false, rle = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    std::istringstream is{line};
    std::string tag;
    is >> tag;
    if (!magic) {
      int version = 0;
      is >> version;
      if (tag != "racegame-kernel" || version != 1) {
        detail::fail_at(name, lineno, "expected header 'racegame-kernel 1'");
      }
      magic = true;
      continue;
    }
    if (tag == "grid") {
      is >> k.spec_.x_min >> k.spec_.y_min >> k.spec_.cell_m >> k.spec_.nx >> k.spec_.ny >>
          k.spec_.headings;
      if (!is) detail::fail_at(name, lineno, "malformed grid line");
      grid = true;
    } else if (tag == "params") {
      int conv = 0;
      is >> k.spec_.inflation_cells >> k.spec_.track_margin_m >> k.sweeps_ >> conv;
      if (!is) detail::fail_at(name, lineno, "malformed params line");
      k.converged_ = conv != 0;
      params = true;
    } else if (tag == "modes") {
      std::size_t count = 0;
      is >> count;
      k.mode_ids_.resize(count);
      for (auto& id : k.mode_ids_) is >> id;
      if (!is) detail::fail_at(name, lineno, "malformed modes line");
      modes = true;
    } else if (tag == "rle") {
      if (!grid || !modes) detail::fail_at(name, lineno, "rle before grid/modes");
      const std::size_t total = static_cast<std::size_t>(k.spec_.nx) * k.spec_.ny *
                                k.spec_.headings * k.mode_ids_.size();
      k.members_.assign(total, 0);
      std::size_t pos = 0;
      std::uint8_t value = 0;
      std::size_t run = 0;
      while (is >> run) {
        if (pos + run > total) detail::fail_at(name, lineno, "rle overruns the grid");
        std::fill(k.members_.begin() + static_cast<std::ptrdiff_t>(pos),
                  k.members_.begin() + static_cast<std::ptrdiff_t>(pos + run), value);
        pos += run;
        value = static_cast<std::uint8_t>(1 - value);
      }
      if (pos != total) detail::fail_at(name, lineno, "rle does not fill the grid");
      rle = true;
    } else {
      detail::fail_at(name, lineno, "unknown directive '" + tag + "'");
    }
  }
  if (!magic || !grid || !params || !modes || !rle) {
    throw ValidationError(name + ": incomplete kernel file");
  }
  return k;
}

namespace {

bool nstep_rec(const TrackModel& track, const PrimitiveLibrary& library, const CarPose& pose,
               int depth) {
  if (depth == 0) return true;
  const std::size_t cur = library.index_of(pose.mode);
  for (int s : library.successors(cur)) {
    const CarPose next = step_primitive(pose, library.primitive(static_cast<std::size_t>(s)), track);
    if (!track.in_track(next)) continue;
    if (nstep_rec(track, library, next, depth - 1)) return true;
  }
  return false;
}

}  // namespace

bool nstep_feasible_prune(const TrackModel& track, const PrimitiveLibrary& library,
                          const CarPose& pose, int depth) {
  if (depth < 1) throw ValidationError("nstep pruning depth must be >= 1");
  return nstep_rec(track, library, pose, depth);
}

}  // namespace racegame
