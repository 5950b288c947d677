#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "racegame/collision.hpp"
#include "racegame/motion.hpp"
#include "racegame/track.hpp"

namespace racegame {

enum class GameKind { sequential, cooperative, blocking };

const char* to_string(GameKind kind);
GameKind game_kind_from_string(const std::string& s);

// Payoff parameters. kappa penalizes leaving the track, lambda penalizes
// collisions (0 > lambda >= kappa), w rewards being ahead at the end of the
// horizon (blocking game only), sigma weighs slack in the soft variant.
struct GameParams {
  double kappa = -10.0;
  double lambda = -1.0;
  double w = 0.0;
  double sigma = 0.0;
  GameKind kind = GameKind::cooperative;

  void validate() const;  // throws ValidationError
};

// Small dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int i, int j) { return v_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j)]; }
  double at(int i, int j) const { return v_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j)]; }
  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

// Collapsed per-pair feasibility label. Classification keeps the per-player
// facts separately; the label applies the documented precedence (P1 off-track
// before P2 off-track before collision) for reporting and export.
enum class PairFlag : std::uint8_t { feasible = 0, p1_off_track = 1, p2_off_track = 2, collision = 3 };

const char* to_string(PairFlag flag);
PairFlag pair_flag_from_string(const std::string& s);

// Everything the payoff builders need to know about an n x m trajectory-set
// pairing: per-trajectory track violations, per-pair collisions, slack
// multipliers (total penetration over the horizon) and terminal progress.
struct PairClassification {
  int n = 0;  // P1 trajectories (rows)
  int m = 0;  // P2 trajectories (cols)
  std::vector<std::uint8_t> off_track1;  // n
  std::vector<std::uint8_t> off_track2;  // m
  std::vector<std::uint8_t> collide;     // n*m, row-major
  Matrix slack;                          // n x m, S_{i,j} >= 0
  std::vector<double> progress1;         // n, p(x_i^1(N))
  std::vector<double> progress2;         // m, p(x_j^2(N))
  std::uint64_t distance_checks = 0;     // (pair, step) collision evaluations

  bool pair_collides(int i, int j) const {
    return collide[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)] != 0;
  }
  bool pair_feasible(int i, int j) const {
    return off_track1[static_cast<std::size_t>(i)] == 0 && off_track2[static_cast<std::size_t>(j)] == 0 &&
           !pair_collides(i, j);
  }
  PairFlag flag(int i, int j) const;
};

// Classifies every trajectory pair: off-track if any step k = 1..N leaves the
// track, colliding if any step's signed distance is negative; slack sums the
// positive penetrations. All trajectories must share one horizon.
PairClassification classify_pairs(std::span<const Trajectory> t1, std::span<const Trajectory> t2,
                                  const TrackModel& track, BoxShape shape);

// Classification restricted to one P1 trajectory against all of P2's; used by
// the sequential-game fast path so collision checks stay linear in m.
PairClassification classify_row(const Trajectory& leader, std::span<const Trajectory> t2,
                                const TrackModel& track, BoxShape shape);

// Payoff matrices of one game instance plus the data needed to re-derive and
// export them.
struct PayoffMatrices {
  Matrix a;  // P1
  Matrix b;  // P2
  std::vector<PairFlag> flags;  // n*m, row-major
  std::vector<double> progress1;
  std::vector<double> progress2;
  GameParams params;

  int rows() const { return a.rows(); }
  int cols() const { return a.cols(); }
  PairFlag flag(int i, int j) const {
    return flags[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(j)];
  }
  // Row payoffs a_i of a sequential game (every row of A is constant).
  std::vector<double> row_payoffs() const;
};

// Hard-constrained payoffs per params.kind. Throws ValidationError when kappa
// or lambda does not lie strictly below every attainable progress.
PayoffMatrices build_payoffs(const PairClassification& cls, const GameParams& params);

// Soft variant: the collision case is replaced by the collision-free payoff
// reduced by sigma * S_{i,j} for both players; off-track handling is
// unchanged.
PayoffMatrices build_soft_payoffs(const PairClassification& cls, const GameParams& params);

// Exactness bound: (max - min finite payoff) / (min positive slack). Above
// this weight the soft game cannot prefer a colliding pair. Returns 0 when no
// pair collides.
double soft_exactness_bound(const PairClassification& cls, const GameParams& params);

// There exists a fully feasible trajectory pair.
bool check_assumption_feasible_pair(const PairClassification& cls);

// Sequential-game assumption: the leader's best row beats kappa and some
// follower reply earns more than lambda against every leader-optimal row.
// `seq` must be a sequential-game build.
bool check_assumption_seq(const PayoffMatrices& seq);

enum class Player : int { p1 = 0, p2 = 1 };

// The car ahead at the start leads; ties go to P1.
Player determine_leader(double p1_progress, double p2_progress);

// CSV export/import (header row, '.' decimals, full double precision).
void save_matrix_csv(const std::string& path, const Matrix& m);
void save_matrix_csv(std::ostream& out, const Matrix& m);
Matrix load_matrix_csv(const std::string& path);
Matrix load_matrix_csv(std::istream& in, const std::string& name = "<stream>");

void save_flags_csv(const std::string& path, const PayoffMatrices& game);
std::vector<PairFlag> load_flags_csv(const std::string& path, int* rows = nullptr, int* cols = nullptr);

}  // namespace racegame
