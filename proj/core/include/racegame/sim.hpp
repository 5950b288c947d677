#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "racegame/game.hpp"
#include "racegame/kernel.hpp"
#include "racegame/motion.hpp"
#include "racegame/solver.hpp"
#include "racegame/track.hpp"

namespace racegame {

enum class EquilibriumConcept { stackelberg, nash_ror, sequential };

const char* to_string(EquilibriumConcept c);
EquilibriumConcept concept_from_string(const std::string& s);

enum class PrunerKind { none, kernel, nstep };

const char* to_string(PrunerKind k);
PrunerKind pruner_kind_from_string(const std::string& s);

struct PlayerSetup {
  std::shared_ptr<const PrimitiveLibrary> library;
  std::shared_ptr<const GridKernel> kernel;  // required for PrunerKind::kernel
  PrunerKind pruner = PrunerKind::none;
  int nstep_depth = 2;
  std::string profile;  // informational label ("aggressive", "cautious", ...)

  PosePruner make_pruner(const TrackModel& track) const;
};

struct RaceConfig {
  std::shared_ptr<const TrackModel> track;
  std::array<PlayerSetup, 2> players;
  int horizon = 3;
  GameParams game;  // game.kind selects the payoff; game.sigma applies when soft
  EquilibriumConcept equilibrium = EquilibriumConcept::stackelberg;
  bool soft = false;
  int duration_steps = 250;
  std::uint64_t seed = 0;
  double gap_min_m = 0.0;
  double gap_max_m = 0.2;
  double initial_speed_mps = 0.5;
  BoxShape car;
  double collision_threshold_m = 0.01;
  int overtake_hold_steps = 5;
  double exec_noise_m = 0.0;  // bounded uniform position perturbation, off by default

  void validate() const;  // throws ValidationError
};

struct StepRecord {
  int step = 0;
  int leader_car = 0;                 // car index that led when the game was built
  int strategy_i = -1;                // leader strategy index, -1 on emergency
  int strategy_j = -1;                // follower strategy index
  bool emergency = false;
  PairFlag chosen_flag = PairFlag::feasible;
  std::array<CarPose, 2> poses{};     // executed poses (after the step)
  std::array<double, 2> progress{};   // cumulative progress after the step
  std::array<TrackModel::StepKind, 2> step_kind{};  // projection classification
  double min_signed_distance = 0.0;   // between the executed footprints
  std::array<int, 2> trajectory_count{};
  std::uint64_t sd_calls = 0;         // signed-distance evaluations this step
  double generation_seconds = 0.0;    // trajectory enumeration time
  double collision_seconds = 0.0;     // classification + solve time
};

struct RaceLog {
  std::uint64_t seed = 0;
  std::array<CarPose, 2> initial_poses{};
  std::array<double, 2> initial_progress{};
  int initial_leader = 0;
  std::vector<StepRecord> steps;

  std::array<double, 2> final_progress() const;
  // Per-step CSV without timing columns, so equal seeds give equal bytes.
  void to_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
};

struct OvertakeEvent {
  int step = 0;        // first step of the persistent change
  int new_leader = 0;  // car index that completed the overtake
};

// Debounced overtake detector: a leader change (by progress; ties keep the
// current leader) counts once it persists for `hold_steps` consecutive steps.
std::vector<OvertakeEvent> detect_overtakes(const RaceLog& log, int hold_steps);

// Seeds the RNG, samples the initial poses on the centerline (tangent
// heading, configured gap between footprints, one randomly chosen car ahead)
// and plays `duration_steps` receding-horizon rounds. Deterministic per seed.
RaceLog run_race(const RaceConfig& config);

// One receding-horizon round: relabels the cars so the leader is P1, builds
// and solves the configured game, executes the first primitive of the chosen
// pair (emergency braking when hard constraints leave no acceptable pair),
// advances `poses` and returns the record.
StepRecord step_race(std::array<CarPose, 2>& poses, const RaceConfig& config, int step_index,
                     std::mt19937_64& rng);

struct TimingSummary {
  double mean_s = 0.0;
  double max_s = 0.0;
};

struct RaceMetrics {
  int races = 0;
  std::int64_t steps = 0;
  std::int64_t overtakes_total = 0;
  std::array<std::int64_t, 2> overtakes_by_car{};
  int runs_with_overtakes = 0;
  std::int64_t colliding_steps = 0;
  double collision_probability = 0.0;
  double collision_threshold_m = 0.0;
  double mean_progress_m = 0.0;  // mean over cars and races of gained progress
  std::array<double, 2> mean_progress_by_car{};
  int stay_ahead_runs = 0;
  std::array<int, 2> wins_by_car{};
  int win_ties = 0;
  std::int64_t emergency_steps = 0;
  TimingSummary generation_time;
  TimingSummary collision_time;

  std::string to_json(bool include_timing = true) const;
};

struct RaceSummary {
  std::uint64_t seed = 0;
  std::array<double, 2> progress_gain{};
  int overtakes = 0;
  int winner = -1;  // -1 on a tie
  bool stayed_ahead = false;
  double min_signed_distance = 0.0;
  std::int64_t emergency_steps = 0;
};

RaceMetrics aggregate_metrics(std::span<const RaceLog> logs, const RaceConfig& config,
                              std::vector<RaceSummary>* per_race = nullptr);

// Runs one race per seed (in parallel across `threads`) and aggregates in
// seed order.
RaceMetrics run_batch(const RaceConfig& base, std::span<const std::uint64_t> seeds, int threads,
                      std::vector<RaceSummary>* per_race = nullptr);

void save_per_race_csv(const std::string& path, std::span<const RaceSummary> rows);

}  // namespace racegame
