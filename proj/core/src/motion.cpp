#include "racegame/motion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "racegame/errors.hpp"
#include "text_io.hpp"

namespace racegame {

PrimitiveLibrary::PrimitiveLibrary(std::vector<MotionPrimitive> primitives,
                                   std::vector<std::vector<int>> successor_ids) {
  if (primitives.empty()) throw ValidationError("primitive library is empty");
  if (primitives.size() != successor_ids.size()) {
    throw ValidationError("primitive/successor list size mismatch");
  }
  // Keep primitives sorted by id; remap the successor lists alongside.
  std::vector<std::size_t> order(primitives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return primitives[a].id < primitives[b].id;
  });
  std::unordered_map<int, int> index_by_id;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& p = primitives[order[pos]];
    if (!index_by_id.emplace(p.id, static_cast<int>(pos)).second) {
      throw ValidationError("duplicate primitive id " + std::to_string(p.id));
    }
  }
  primitives_.reserve(primitives.size());
  successors_.reserve(primitives.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    primitives_.push_back(primitives[order[pos]]);
    std::vector<int> succ;
    succ.reserve(successor_ids[order[pos]].size());
    for (int id : successor_ids[order[pos]]) {
      auto it = index_by_id.find(id);
      if (it == index_by_id.end()) {
        throw ValidationError("successor id " + std::to_string(id) + " does not exist");
      }
      succ.push_back(it->second);
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    successors_.push_back(std::move(succ));
  }
  duration_ = primitives_.front().duration;
  validate();
}

void PrimitiveLibrary::validate() const {
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const auto& p = primitives_[i];
    if (p.speed < 0.0) throw ValidationError("primitive speed must be >= 0");
    if (p.duration <= 0.0) throw ValidationError("primitive duration must be > 0");
    if (std::abs(p.duration - duration_) > 1e-12) {
      throw ValidationError("all primitives must share one duration");
    }
    if (successors_[i].empty()) {
      throw ValidationError("primitive id " + std::to_string(p.id) + " has no successors");
    }
  }
}

PrimitiveLibrary PrimitiveLibrary::generate(const std::vector<double>& speed_grid,
                                            const std::vector<double>& yaw_rate_grid,
                                            double accel_limit, double yaw_accel_limit,
                                            double duration) {
  if (speed_grid.empty() || yaw_rate_grid.empty()) {
    throw ValidationError("primitive grids must be non-empty");
  }
  if (accel_limit <= 0.0 || yaw_accel_limit <= 0.0 || duration <= 0.0) {
    throw ValidationError("primitive limits and duration must be positive");
  }
  std::vector<MotionPrimitive> prims;
  prims.reserve(speed_grid.size() * yaw_rate_grid.size());
  int id = 0;
  for (double v : speed_grid) {
    for (double w : yaw_rate_grid) {
      prims.push_back(MotionPrimitive{id++, v, w, duration});
    }
  }
  const double dv_max = accel_limit * duration;
  const double dw_max = yaw_accel_limit * duration;
  std::vector<std::vector<int>> succ(prims.size());
  for (std::size_t i = 0; i < prims.size(); ++i) {
    for (std::size_t j = 0; j < prims.size(); ++j) {
      if (std::abs(prims[i].speed - prims[j].speed) <= dv_max &&
          std::abs(prims[i].yaw_rate - prims[j].yaw_rate) <= dw_max) {
        succ[i].push_back(prims[j].id);
      }
    }
  }
  return PrimitiveLibrary(std::move(prims), std::move(succ));
}

std::size_t PrimitiveLibrary::index_of(int id) const {
  auto it = std::lower_bound(primitives_.begin(), primitives_.end(), id,
                             [](const MotionPrimitive& p, int v) { return p.id < v; });
  if (it == primitives_.end() || it->id != id) {
    throw ValidationError("unknown primitive id " + std::to_string(id));
  }
  return static_cast<std::size_t>(it - primitives_.begin());
}

bool PrimitiveLibrary::has_id(int id) const {
  auto it = std::lower_bound(primitives_.begin(), primitives_.end(), id,
                             [](const MotionPrimitive& p, int v) { return p.id < v; });
  return it != primitives_.end() && it->id == id;
}

std::size_t PrimitiveLibrary::braking_successor(std::size_t index) const {
  const auto& succ = successors_[index];
  std::size_t best = succ.front();
  for (int cand : succ) {
    const auto& c = primitives_[cand];
    const auto& b = primitives_[best];
    if (c.speed < b.speed ||
        (c.speed == b.speed && std::abs(c.yaw_rate) < std::abs(b.yaw_rate))) {
      best = static_cast<std::size_t>(cand);
    }
  }
  return best;
}

PrimitiveLibrary PrimitiveLibrary::speed_capped(double max_speed) const {
  std::vector<MotionPrimitive> prims;
  for (const auto& p : primitives_) {
    if (p.speed <= max_speed) prims.push_back(p);
  }
  if (prims.empty()) {
    throw ValidationError("speed cap " + std::to_string(max_speed) + " removes every primitive");
  }
  std::vector<std::vector<int>> succ(prims.size());
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const std::size_t orig = index_of(prims[i].id);
    for (int s : successors_[orig]) {
      const auto& sp = primitives_[s];
      if (sp.speed <= max_speed) succ[i].push_back(sp.id);
    }
    if (succ[i].empty()) succ[i].push_back(prims[i].id);  // keep the automaton total
  }
  return PrimitiveLibrary(std::move(prims), std::move(succ));
}

void PrimitiveLibrary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write primitive library '" + path + "'");
  save(out);
}

void PrimitiveLibrary::save(std::ostream& out) const {
  out << "racegame-primitives 1\n";
  out << "count " << primitives_.size() << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const auto& p = primitives_[i];
    out << "prim " << p.id << " " << p.speed << " " << p.yaw_rate << " " << p.duration << " "
        << successors_[i].size();
    for (int s : successors_[i]) out << " " << primitives_[s].id;
    out << "\n";
  }
}

PrimitiveLibrary PrimitiveLibrary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open primitive library '" + path + "'");
  return load(in, path);
}

PrimitiveLibrary PrimitiveLibrary::load(std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;
  bool magic_seen = false;
  std::size_t declared = 0;
  std::vector<MotionPrimitive> prims;
  std::vector<std::vector<int>> succ;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    const auto tok = detail::split(line, ' ');
    std::vector<std::string_view> fields;
    for (auto t : tok) {
      if (!t.empty()) fields.push_back(t);
    }
    if (fields.empty()) continue;
    if (!magic_seen) {
      if (fields.size() != 2 || fields[0] != "racegame-primitives" || fields[1] != "1") {
        detail::fail_at(name, lineno, "expected header 'racegame-primitives 1'");
      }
      magic_seen = true;
      continue;
    }
    if (fields[0] == "count") {
      if (fields.size() != 2) detail::fail_at(name, lineno, "malformed count line");
      declared = static_cast<std::size_t>(detail::parse_long(fields[1], name, lineno));
      continue;
    }
    if (fields[0] != "prim") detail::fail_at(name, lineno, "unknown directive '" + std::string(fields[0]) + "'");
    if (fields.size() < 6) detail::fail_at(name, lineno, "malformed prim line");
    MotionPrimitive p;
    p.id = static_cast<int>(detail::parse_long(fields[1], name, lineno));
    p.speed = detail::parse_double(fields[2], name, lineno);
    p.yaw_rate = detail::parse_double(fields[3], name, lineno);
    p.duration = detail::parse_double(fields[4], name, lineno);
    const std::size_t n_succ = static_cast<std::size_t>(detail::parse_long(fields[5], name, lineno));
    if (fields.size() != 6 + n_succ) {
      detail::fail_at(name, lineno, "successor count does not match the row");
    }
    std::vector<int> s;
    for (std::size_t k = 0; k < n_succ; ++k) {
      s.push_back(static_cast<int>(detail::parse_long(fields[6 + k], name, lineno)));
    }
    prims.push_back(p);
    succ.push_back(std::move(s));
  }
  if (!magic_seen) throw ValidationError(name + ": missing 'racegame-primitives 1' header");
  if (declared != 0 && declared != prims.size()) {
    throw ValidationError(name + ": declared count " + std::to_string(declared) + " but found " +
                          std::to_string(prims.size()) + " primitives");
  }
  return PrimitiveLibrary(std::move(prims), std::move(succ));
}

CarPose step_primitive(const CarPose& pose, const MotionPrimitive& prim, const TrackModel& track) {
  CarPose next = pose;
  const double t = prim.duration;
  if (prim.yaw_rate == 0.0) {
    next.x = pose.x + prim.speed * t * std::cos(pose.heading);
    next.y = pose.y + prim.speed * t * std::sin(pose.heading);
  } else {
    const double r = prim.speed / prim.yaw_rate;
    const double h1 = pose.heading + prim.yaw_rate * t;
    next.x = pose.x + r * (std::sin(h1) - std::sin(pose.heading));
    next.y = pose.y - r * (std::cos(h1) - std::cos(pose.heading));
    next.heading = wrap_angle(h1);
  }
  next.mode = prim.id;
  next.lap = track.update_lap_counter(pose, next);
  return next;
}

namespace {

void enumerate_rec(const PrimitiveLibrary& library, const TrackModel& track,
                   const PosePruner& pruner, int remaining, int owner,
                   std::vector<CarPose>& states, std::vector<int>& modes,
                   std::vector<Trajectory>& out) {
  if (remaining == 0) {
    out.push_back(Trajectory{states, modes, owner});
    return;
  }
  const std::size_t cur = library.index_of(states.back().mode);
  for (int succ : library.successors(cur)) {
    const MotionPrimitive& prim = library.primitive(static_cast<std::size_t>(succ));
    const CarPose next = step_primitive(states.back(), prim, track);
    if (pruner && !pruner(next)) continue;
    states.push_back(next);
    modes.push_back(prim.id);
    enumerate_rec(library, track, pruner, remaining - 1, owner, states, modes, out);
    states.pop_back();
    modes.pop_back();
  }
}

}  // namespace

std::vector<Trajectory> enumerate_trajectories(const CarPose& start,
                                               const PrimitiveLibrary& library, int horizon,
                                               const TrackModel& track, const PosePruner& pruner,
                                               int owner) {
  if (horizon < 1) throw ValidationError("enumeration horizon must be >= 1");
  library.index_of(start.mode);  // validates the start mode
  std::vector<Trajectory> out;
  std::vector<CarPose> states{start};
  std::vector<int> modes;
  enumerate_rec(library, track, pruner, horizon, owner, states, modes, out);
  return out;
}

std::uint64_t count_trajectories(int start_mode_id, const PrimitiveLibrary& library, int horizon) {
  if (horizon < 1) throw ValidationError("enumeration horizon must be >= 1");
  std::vector<std::uint64_t> counts(library.size(), 1);  // sequences of length 0
  for (int step = 0; step < horizon; ++step) {
    std::vector<std::uint64_t> next(library.size(), 0);
    for (std::size_t q = 0; q < library.size(); ++q) {
      std::uint64_t total = 0;
      for (int s : library.successors(q)) total += counts[static_cast<std::size_t>(s)];
      next[q] = total;
    }
    counts = std::move(next);
  }
  return counts[library.index_of(start_mode_id)];
}

}  // namespace racegame
