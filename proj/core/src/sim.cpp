#include "racegame/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "racegame/collision.hpp"
#include "racegame/errors.hpp"

namespace racegame {

const char* to_string(EquilibriumConcept c) {
  switch (c) {
    case EquilibriumConcept::stackelberg: return "stackelberg";
    case EquilibriumConcept::nash_ror: return "nash_ror";
    case EquilibriumConcept::sequential: return "sequential";
  }
  return "?";
}

EquilibriumConcept concept_from_string(const std::string& s) {
  if (s == "stackelberg") return EquilibriumConcept::stackelberg;
  if (s == "nash_ror") return EquilibriumConcept::nash_ror;
  if (s == "sequential") return EquilibriumConcept::sequential;
  throw ValidationError("unknown equilibrium concept '" + s + "'");
}

const char* to_string(PrunerKind k) {
  switch (k) {
    case PrunerKind::none: return "none";
    case PrunerKind::kernel: return "kernel";
    case PrunerKind::nstep: return "nstep";
  }
  return "?";
}

PrunerKind pruner_kind_from_string(const std::string& s) {
  if (s == "none") return PrunerKind::none;
  if (s == "kernel") return PrunerKind::kernel;
  if (s == "nstep") return PrunerKind::nstep;
  throw ValidationError("unknown pruner kind '" + s + "'");
}

PosePruner PlayerSetup::make_pruner(const TrackModel& track) const {
  switch (pruner) {
    case PrunerKind::none:
      return {};
    case PrunerKind::kernel: {
      if (!kernel) throw ValidationError("kernel pruner configured without a kernel");
      const GridKernel* k = kernel.get();
      return [k](const CarPose& pose) { return k->contains(pose); };
    }
    case PrunerKind::nstep: {
      const TrackModel* t = &track;
      const PrimitiveLibrary* lib = library.get();
      const int depth = nstep_depth;
      return [t, lib, depth](const CarPose& pose) {
        return t->in_track(pose) && nstep_feasible_prune(*t, *lib, pose, depth);
      };
    }
  }
  return {};
}

void RaceConfig::validate() const {
  if (!track) throw ValidationError("race config has no track");
  for (const auto& p : players) {
    if (!p.library) throw ValidationError("race config has a player without a library");
    if (p.pruner == PrunerKind::kernel && !p.kernel) {
      throw ValidationError("kernel pruner configured without a kernel");
    }
    if (p.pruner == PrunerKind::nstep && p.nstep_depth < 1) {
      throw ValidationError("nstep pruning depth must be >= 1");
    }
  }
  if (horizon < 1) throw ValidationError("race horizon must be >= 1");
  if (duration_steps < 0) throw ValidationError("race duration must be >= 0");
  if (gap_min_m < 0.0 || gap_max_m < gap_min_m) throw ValidationError("bad initial gap range");
  if (collision_threshold_m < 0.0) throw ValidationError("collision threshold must be >= 0");
  if (overtake_hold_steps < 1) throw ValidationError("overtake hold must be >= 1");
  if (exec_noise_m < 0.0) throw ValidationError("execution noise must be >= 0");
  if (equilibrium == EquilibriumConcept::sequential && game.kind != GameKind::sequential) {
    throw ValidationError("the sequential concept applies to the sequential game only");
  }
  game.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int pick_initial_mode(const PrimitiveLibrary& lib, double target_speed) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < lib.size(); ++i) {
    const auto& c = lib.primitive(i);
    const auto& b = lib.primitive(best);
    const double dc = std::abs(c.speed - target_speed);
    const double db = std::abs(b.speed - target_speed);
    if (dc < db || (dc == db && std::abs(c.yaw_rate) < std::abs(b.yaw_rate))) best = i;
  }
  return lib.primitive(best).id;
}

// Maximal admissible deceleration, preferring successors that keep the car
// inside its pruner's viable set (else on the track) so one emergency cannot
// strand the car outside its kernel, where every later enumeration would be
// empty. Ties lean toward zero yaw rate.
CarPose brake_step(const CarPose& pose, const PlayerSetup& player, const TrackModel& track) {
  const PrimitiveLibrary& lib = *player.library;
  const PosePruner pruner = player.make_pruner(track);
  const std::size_t cur = lib.index_of(pose.mode);
  auto slower = [&](std::size_t a, std::size_t b) {
    const auto& pa = lib.primitive(a);
    const auto& pb = lib.primitive(b);
    return pa.speed < pb.speed ||
           (pa.speed == pb.speed && std::abs(pa.yaw_rate) < std::abs(pb.yaw_rate));
  };
  std::ptrdiff_t best_viable = -1;
  std::ptrdiff_t best_on_track = -1;
  for (int s : lib.successors(cur)) {
    const auto idx = static_cast<std::size_t>(s);
    const CarPose next = step_primitive(pose, lib.primitive(idx), track);
    if (pruner && pruner(next)) {
      if (best_viable < 0 || slower(idx, static_cast<std::size_t>(best_viable))) best_viable = s;
    }
    if (track.in_track(next)) {
      if (best_on_track < 0 || slower(idx, static_cast<std::size_t>(best_on_track))) best_on_track = s;
    }
  }
  std::size_t mode = lib.braking_successor(cur);
  if (best_viable >= 0) {
    mode = static_cast<std::size_t>(best_viable);
  } else if (best_on_track >= 0) {
    mode = static_cast<std::size_t>(best_on_track);
  }
  return step_primitive(pose, lib.primitive(mode), track);
}

// The leader's fallback during emergencies: best progress among enumerated
// trajectories that stay on track, braking when there is none.
CarPose unconstrained_optimum_step(std::span<const Trajectory> trajs, const CarPose& pose,
                                   const PlayerSetup& player, const TrackModel& track) {
  int best = -1;
  double best_progress = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trajs.size(); ++t) {
    bool on_track = true;
    for (std::size_t k = 1; k < trajs[t].states.size(); ++k) {
      if (!track.in_track(trajs[t].states[k])) {
        on_track = false;
        break;
      }
    }
    if (!on_track) continue;
    const double p = track.progress(trajs[t].terminal());
    if (p > best_progress) {
      best_progress = p;
      best = static_cast<int>(t);
    }
  }
  if (best < 0) return brake_step(pose, player, track);
  return trajs[static_cast<std::size_t>(best)].states[1];
}

struct Decision {
  bool emergency = false;
  int i = -1;  // leader index
  int j = -1;  // follower index
  PairFlag flag = PairFlag::feasible;
};

double turn_effort(const Trajectory& t, const PrimitiveLibrary& lib) {
  double sum = 0.0;
  for (int id : t.modes) sum += std::abs(lib.primitive(lib.index_of(id)).yaw_rate);
  return sum;
}

// Payoff-equal equilibria leave the announced pair open; picking the
// smoothest pair of lines keeps the receding-horizon leader from weaving
// between index-ordered twins of the same payoff step after step.
StrategyPair smoothest_pair(std::span<const StrategyPair> pairs,
                            std::span<const Trajectory> lead, std::span<const Trajectory> foll,
                            const PrimitiveLibrary& lead_lib, const PrimitiveLibrary& foll_lib) {
  StrategyPair best = pairs.front();
  double best_lead = turn_effort(lead[static_cast<std::size_t>(best.i)], lead_lib);
  double best_foll = turn_effort(foll[static_cast<std::size_t>(best.j)], foll_lib);
  for (const auto& p : pairs.subspan(1)) {
    const double el = turn_effort(lead[static_cast<std::size_t>(p.i)], lead_lib);
    const double ef = turn_effort(foll[static_cast<std::size_t>(p.j)], foll_lib);
    if (el < best_lead || (el == best_lead && ef < best_foll)) {
      best = p;
      best_lead = el;
      best_foll = ef;
    }
  }
  return best;
}

// Sequential game: the leader maximizes its own (follower-independent) row
// payoff, then only that row of B is classified, keeping the collision work
// linear in the follower's trajectory count.
Decision decide_sequential(std::span<const Trajectory> lead, std::span<const Trajectory> foll,
                           const RaceConfig& cfg) {
  const TrackModel& track = *cfg.track;
  const PrimitiveLibrary& lead_lib = *cfg.players[static_cast<std::size_t>(lead.front().owner)].library;
  const PrimitiveLibrary& foll_lib = *cfg.players[static_cast<std::size_t>(foll.front().owner)].library;
  int i_s = -1;
  double best = -std::numeric_limits<double>::infinity();
  double best_effort = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lead.size(); ++i) {
    bool off = false;
    for (std::size_t k = 1; k < lead[i].states.size(); ++k) {
      if (!track.in_track(lead[i].states[k])) {
        off = true;
        break;
      }
    }
    const double a = off ? cfg.game.kappa : track.progress(lead[i].terminal());
    const double effort = turn_effort(lead[i], lead_lib);
    if (a > best || (a == best && effort < best_effort)) {
      best = a;
      best_effort = effort;
      i_s = static_cast<int>(i);
    }
  }
  const PairClassification row =
      classify_row(lead[static_cast<std::size_t>(i_s)], foll, track, cfg.car);
  GameParams params = cfg.game;
  params.kind = GameKind::sequential;
  const PayoffMatrices game =
      cfg.soft ? build_soft_payoffs(row, params) : build_payoffs(row, params);
  int j_s = 0;
  double j_effort = turn_effort(foll[0], foll_lib);
  for (int j = 1; j < game.cols(); ++j) {
    const double effort = turn_effort(foll[static_cast<std::size_t>(j)], foll_lib);
    if (game.b.at(0, j) > game.b.at(0, j_s) ||
        (game.b.at(0, j) == game.b.at(0, j_s) && effort < j_effort)) {
      j_s = j;
      j_effort = effort;
    }
  }
  Decision d;
  d.i = i_s;
  d.j = j_s;
  d.flag = row.flag(0, j_s);
  d.emergency = !cfg.soft && d.flag != PairFlag::feasible;
  return d;
}

Decision decide_full(std::span<const Trajectory> lead, std::span<const Trajectory> foll,
                     const RaceConfig& cfg) {
  const PairClassification cls = classify_pairs(lead, foll, *cfg.track, cfg.car);
  const PayoffMatrices game =
      cfg.soft ? build_soft_payoffs(cls, cfg.game) : build_payoffs(cls, cfg.game);
  const PrimitiveLibrary& lead_lib = *cfg.players[static_cast<std::size_t>(lead.front().owner)].library;
  const PrimitiveLibrary& foll_lib = *cfg.players[static_cast<std::size_t>(foll.front().owner)].library;
  Decision d;
  StrategyPair chosen{};
  if (cfg.equilibrium == EquilibriumConcept::nash_ror) {
    const auto nash = nash_pure(game.a, game.b);
    if (nash.empty()) {
      d.emergency = true;
      return d;
    }
    const auto ror = rules_of_the_road(nash, game.a);
    chosen = smoothest_pair(ror, lead, foll, lead_lib, foll_lib);
  } else {
    const auto st = stackelberg(game.a, game.b);
    chosen = smoothest_pair(st, lead, foll, lead_lib, foll_lib);
  }
  d.i = chosen.i;
  d.j = chosen.j;
  d.flag = cls.flag(d.i, d.j);
  d.emergency = !cfg.soft && d.flag != PairFlag::feasible;
  return d;
}

}  // namespace

StepRecord step_race(std::array<CarPose, 2>& poses, const RaceConfig& config, int step_index,
                     std::mt19937_64& rng) {
  const TrackModel& track = *config.track;
  StepRecord rec;
  rec.step = step_index;

  const double p0 = track.progress(poses[0]);
  const double p1 = track.progress(poses[1]);
  const int leader = determine_leader(p0, p1) == Player::p1 ? 0 : 1;
  const int follower = 1 - leader;
  rec.leader_car = leader;

  const std::uint64_t sd_before = signed_distance_call_count();

  const auto gen_start = Clock::now();
  const auto lead_trajs =
      enumerate_trajectories(poses[leader], *config.players[static_cast<std::size_t>(leader)].library,
                             config.horizon, track,
                             config.players[static_cast<std::size_t>(leader)].make_pruner(track), leader);
  const auto foll_trajs = enumerate_trajectories(
      poses[follower], *config.players[static_cast<std::size_t>(follower)].library, config.horizon,
      track, config.players[static_cast<std::size_t>(follower)].make_pruner(track), follower);
  rec.generation_seconds = seconds_since(gen_start);
  rec.trajectory_count[static_cast<std::size_t>(leader)] = static_cast<int>(lead_trajs.size());
  rec.trajectory_count[static_cast<std::size_t>(follower)] = static_cast<int>(foll_trajs.size());

  const auto solve_start = Clock::now();
  Decision decision;
  if (lead_trajs.empty() || foll_trajs.empty()) {
    decision.emergency = true;
  } else if (config.game.kind == GameKind::sequential) {
    decision = decide_sequential(lead_trajs, foll_trajs, config);
  } else {
    decision = decide_full(lead_trajs, foll_trajs, config);
  }
  rec.collision_seconds = seconds_since(solve_start);
  rec.sd_calls = signed_distance_call_count() - sd_before;
  rec.chosen_flag = decision.flag;

  std::array<CarPose, 2> next = poses;
  if (!decision.emergency) {
    rec.strategy_i = decision.i;
    rec.strategy_j = decision.j;
    next[static_cast<std::size_t>(leader)] = lead_trajs[static_cast<std::size_t>(decision.i)].states[1];
    next[static_cast<std::size_t>(follower)] = foll_trajs[static_cast<std::size_t>(decision.j)].states[1];
  } else {
    rec.emergency = true;
    next[static_cast<std::size_t>(follower)] =
        brake_step(poses[static_cast<std::size_t>(follower)],
                   config.players[static_cast<std::size_t>(follower)], track);
    next[static_cast<std::size_t>(leader)] =
        unconstrained_optimum_step(lead_trajs, poses[static_cast<std::size_t>(leader)],
                                   config.players[static_cast<std::size_t>(leader)], track);
  }

  if (config.exec_noise_m > 0.0) {
    std::uniform_real_distribution<double> noise(-config.exec_noise_m, config.exec_noise_m);
    for (std::size_t c = 0; c < 2; ++c) {
      CarPose perturbed = next[c];
      perturbed.x += noise(rng);
      perturbed.y += noise(rng);
      perturbed.lap = track.update_lap_counter(poses[c], perturbed);
      next[c] = perturbed;
    }
  }

  for (std::size_t c = 0; c < 2; ++c) {
    const double s_prev = track.project(Vec2{poses[c].x, poses[c].y});
    const double s_next = track.project(Vec2{next[c].x, next[c].y});
    rec.step_kind[c] = track.classify_step(s_prev, s_next);
  }
  rec.poses = next;
  rec.progress[0] = track.progress(next[0]);
  rec.progress[1] = track.progress(next[1]);
  rec.min_signed_distance =
      signed_distance(box_at(next[0], config.car), box_at(next[1], config.car));
  poses = next;
  return rec;
}

RaceLog run_race(const RaceConfig& config) {
  config.validate();
  const TrackModel& track = *config.track;
  std::mt19937_64 rng(config.seed);

  RaceLog log;
  log.seed = config.seed;

  // Leader car drawn first, then its start line position and the bumper gap.
  std::uniform_int_distribution<int> coin(0, 1);
  const int lead_car = coin(rng);
  std::uniform_real_distribution<double> along(0.0, track.total_length());
  const double s_lead = along(rng);
  std::uniform_real_distribution<double> gap_dist(config.gap_min_m, config.gap_max_m);
  const double gap = gap_dist(rng) + config.car.length;  // footprint gap -> center gap
  double s_follow = s_lead - gap;
  if (s_follow < 0.0) s_follow += track.total_length();

  std::array<CarPose, 2> poses{};
  const int foll_car = 1 - lead_car;
  poses[static_cast<std::size_t>(lead_car)].x = track.point_at(s_lead).x;
  poses[static_cast<std::size_t>(lead_car)].y = track.point_at(s_lead).y;
  poses[static_cast<std::size_t>(lead_car)].heading = track.tangent_heading_at(s_lead);
  poses[static_cast<std::size_t>(lead_car)].mode = pick_initial_mode(
      *config.players[static_cast<std::size_t>(lead_car)].library, config.initial_speed_mps);
  // Keep the leader's progress ahead when the pair straddles the start line.
  poses[static_cast<std::size_t>(lead_car)].lap = (s_lead < s_follow) ? 1 : 0;
  poses[static_cast<std::size_t>(foll_car)].x = track.point_at(s_follow).x;
  poses[static_cast<std::size_t>(foll_car)].y = track.point_at(s_follow).y;
  poses[static_cast<std::size_t>(foll_car)].heading = track.tangent_heading_at(s_follow);
  poses[static_cast<std::size_t>(foll_car)].mode = pick_initial_mode(
      *config.players[static_cast<std::size_t>(foll_car)].library, config.initial_speed_mps);
  poses[static_cast<std::size_t>(foll_car)].lap = 0;

  log.initial_poses = poses;
  log.initial_progress = {track.progress(poses[0]), track.progress(poses[1])};
  log.initial_leader = lead_car;

  log.steps.reserve(static_cast<std::size_t>(config.duration_steps));
  for (int k = 0; k < config.duration_steps; ++k) {
    log.steps.push_back(step_race(poses, config, k, rng));
  }
  return log;
}

std::array<double, 2> RaceLog::final_progress() const {
  if (steps.empty()) return initial_progress;
  return steps.back().progress;
}

namespace {

const char* step_kind_str(TrackModel::StepKind k) {
  switch (k) {
    case TrackModel::StepKind::forward: return "forward";
    case TrackModel::StepKind::backward: return "backward";
    case TrackModel::StepKind::forward_crossing: return "forward_crossing";
    case TrackModel::StepKind::reverse_crossing: return "reverse_crossing";
  }
  return "?";
}

}  // namespace

void RaceLog::to_csv(std::ostream& out) const {
  out.precision(17);
  out << "step,leader_car,strategy_i,strategy_j,emergency,pair_flag";
  for (int c = 0; c < 2; ++c) {
    out << ",car" << c << "_x,car" << c << "_y,car" << c << "_heading,car" << c << "_mode,car" << c
        << "_lap,car" << c << "_progress,car" << c << "_step_kind,car" << c << "_trajectories";
  }
  out << ",min_signed_distance,sd_calls\n";
  for (const auto& s : steps) {
    out << s.step << "," << s.leader_car << "," << s.strategy_i << "," << s.strategy_j << ","
        << (s.emergency ? 1 : 0) << "," << to_string(s.chosen_flag);
    for (std::size_t c = 0; c < 2; ++c) {
      out << "," << s.poses[c].x << "," << s.poses[c].y << "," << s.poses[c].heading << ","
          << s.poses[c].mode << "," << s.poses[c].lap << "," << s.progress[c] << ","
          << step_kind_str(s.step_kind[c]) << "," << s.trajectory_count[c];
    }
    out << "," << s.min_signed_distance << "," << s.sd_calls << "\n";
  }
}

void RaceLog::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write race log '" + path + "'");
  to_csv(out);
}

std::vector<OvertakeEvent> detect_overtakes(const RaceLog& log, int hold_steps) {
  if (hold_steps < 1) throw ValidationError("overtake hold must be >= 1");
  std::vector<OvertakeEvent> events;
  int current = log.initial_leader;
  int streak_leader = -1;
  int streak = 0;
  for (const auto& s : log.steps) {
    int lead = current;  // progress ties keep the current leader
    if (s.progress[0] > s.progress[1]) lead = 0;
    if (s.progress[1] > s.progress[0]) lead = 1;
    if (lead == current) {
      streak = 0;
      streak_leader = -1;
      continue;
    }
    if (lead == streak_leader) {
      ++streak;
    } else {
      streak_leader = lead;
      streak = 1;
    }
    if (streak >= hold_steps) {
      events.push_back(OvertakeEvent{s.step - hold_steps + 1, lead});
      current = lead;
      streak = 0;
      streak_leader = -1;
    }
  }
  return events;
}

RaceMetrics aggregate_metrics(std::span<const RaceLog> logs, const RaceConfig& config,
                              std::vector<RaceSummary>* per_race) {
  RaceMetrics m;
  m.collision_threshold_m = config.collision_threshold_m;
  double gen_sum = 0.0;
  double coll_sum = 0.0;
  for (const RaceLog& log : logs) {
    ++m.races;
    RaceSummary summary;
    summary.seed = log.seed;
    summary.min_signed_distance = std::numeric_limits<double>::infinity();
    const auto events = detect_overtakes(log, config.overtake_hold_steps);
    summary.overtakes = static_cast<int>(events.size());
    m.overtakes_total += static_cast<std::int64_t>(events.size());
    if (!events.empty()) ++m.runs_with_overtakes;
    for (const auto& e : events) ++m.overtakes_by_car[static_cast<std::size_t>(e.new_leader)];
    for (const auto& s : log.steps) {
      ++m.steps;
      if (s.min_signed_distance < -config.collision_threshold_m) ++m.colliding_steps;
      if (s.emergency) {
        ++m.emergency_steps;
        ++summary.emergency_steps;
      }
      summary.min_signed_distance = std::min(summary.min_signed_distance, s.min_signed_distance);
      gen_sum += s.generation_seconds;
      coll_sum += s.collision_seconds;
      m.generation_time.max_s = std::max(m.generation_time.max_s, s.generation_seconds);
      m.collision_time.max_s = std::max(m.collision_time.max_s, s.collision_seconds);
    }
    const auto fin = log.final_progress();
    for (std::size_t c = 0; c < 2; ++c) {
      summary.progress_gain[c] = fin[c] - log.initial_progress[c];
      m.mean_progress_by_car[c] += summary.progress_gain[c];
    }
    int final_leader = log.initial_leader;
    if (fin[0] > fin[1]) final_leader = 0;
    if (fin[1] > fin[0]) final_leader = 1;
    summary.stayed_ahead = final_leader == log.initial_leader;
    if (summary.stayed_ahead) ++m.stay_ahead_runs;
    if (fin[0] == fin[1]) {
      ++m.win_ties;
      summary.winner = -1;
    } else {
      summary.winner = final_leader;
      ++m.wins_by_car[static_cast<std::size_t>(final_leader)];
    }
    if (per_race != nullptr) per_race->push_back(summary);
  }
  if (m.steps > 0) {
    m.collision_probability = static_cast<double>(m.colliding_steps) / static_cast<double>(m.steps);
    m.generation_time.mean_s = gen_sum / static_cast<double>(m.steps);
    m.collision_time.mean_s = coll_sum / static_cast<double>(m.steps);
  }
  if (m.races > 0) {
    for (auto& v : m.mean_progress_by_car) v /= static_cast<double>(m.races);
    m.mean_progress_m = 0.5 * (m.mean_progress_by_car[0] + m.mean_progress_by_car[1]);
  }
  return m;
}

RaceMetrics run_batch(const RaceConfig& base, std::span<const std::uint64_t> seeds, int threads,
                      std::vector<RaceSummary>* per_race) {
  if (seeds.empty()) throw ValidationError("batch needs at least one seed");
  base.validate();
  std::vector<RaceLog> logs(seeds.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(seeds.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      RaceConfig cfg = base;
      cfg.seed = seeds[k];
      logs[k] = run_race(cfg);
    }
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t k = static_cast<std::size_t>(w); k < seeds.size();
             k += static_cast<std::size_t>(workers)) {
          RaceConfig cfg = base;
          cfg.seed = seeds[k];
          logs[k] = run_race(cfg);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return aggregate_metrics(logs, base, per_race);
}

std::string RaceMetrics::to_json(bool include_timing) const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["races"] = races;
  j["steps"] = steps;
  j["overtakes"] = {{"total", overtakes_total},
                    {"by_car", {overtakes_by_car[0], overtakes_by_car[1]}},
                    {"runs_with_overtakes", runs_with_overtakes}};
  j["collision"] = {{"probability", collision_probability},
                    {"steps", colliding_steps},
                    {"threshold_m", collision_threshold_m}};
  j["progress"] = {{"mean_m", mean_progress_m},
                   {"by_car_m", {mean_progress_by_car[0], mean_progress_by_car[1]}}};
  j["stay_ahead_runs"] = stay_ahead_runs;
  j["wins"] = {{"by_car", {wins_by_car[0], wins_by_car[1]}}, {"ties", win_ties}};
  j["emergency_steps"] = emergency_steps;
  if (include_timing) {
    j["timing"] = {{"trajectory_generation_s",
                    {{"mean", generation_time.mean_s}, {"max", generation_time.max_s}}},
                   {"collision_check_s",
                    {{"mean", collision_time.mean_s}, {"max", collision_time.max_s}}}};
  }
  return j.dump(2);
}

void save_per_race_csv(const std::string& path, std::span<const RaceSummary> rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write per-race table '" + path + "'");
  out.precision(17);
  out << "seed,progress_gain_car0,progress_gain_car1,overtakes,winner,stayed_ahead,"
         "min_signed_distance,emergency_steps\n";
  for (const auto& r : rows) {
    out << r.seed << "," << r.progress_gain[0] << "," << r.progress_gain[1] << "," << r.overtakes
        << "," << r.winner << "," << (r.stayed_ahead ? 1 : 0) << "," << r.min_signed_distance
        << "," << r.emergency_steps << "\n";
  }
}

}  // namespace racegame
