#include "racegame/game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "racegame/errors.hpp"
#include "text_io.hpp"

namespace racegame {

const char* to_string(GameKind kind) {
  switch (kind) {
    case GameKind::sequential: return "sequential";
    case GameKind::cooperative: return "cooperative";
    case GameKind::blocking: return "blocking";
  }
  return "?";
}

GameKind game_kind_from_string(const std::string& s) {
  if (s == "sequential") return GameKind::sequential;
  if (s == "cooperative") return GameKind::cooperative;
  if (s == "blocking") return GameKind::blocking;
  throw ValidationError("unknown game kind '" + s + "'");
}

void GameParams::validate() const {
  if (!(kappa <= lambda && lambda < 0.0)) {
    throw ValidationError("game params must satisfy kappa <= lambda < 0");
  }
  if (w < 0.0) throw ValidationError("blocking reward w must be >= 0");
  if (sigma < 0.0) throw ValidationError("soft-constraint weight sigma must be >= 0");
}

const char* to_string(PairFlag flag) {
  switch (flag) {
    case PairFlag::feasible: return "feasible";
    case PairFlag::p1_off_track: return "p1_off_track";
    case PairFlag::p2_off_track: return "p2_off_track";
    case PairFlag::collision: return "collision";
  }
  return "?";
}

PairFlag pair_flag_from_string(const std::string& s) {
  if (s == "feasible") return PairFlag::feasible;
  if (s == "p1_off_track") return PairFlag::p1_off_track;
  if (s == "p2_off_track") return PairFlag::p2_off_track;
  if (s == "collision") return PairFlag::collision;
  throw ValidationError("unknown pair flag '" + s + "'");
}

PairFlag PairClassification::flag(int i, int j) const {
  if (off_track1[static_cast<std::size_t>(i)] != 0) return PairFlag::p1_off_track;
  if (off_track2[static_cast<std::size_t>(j)] != 0) return PairFlag::p2_off_track;
  if (pair_collides(i, j)) return PairFlag::collision;
  return PairFlag::feasible;
}

namespace {

bool leaves_track(const Trajectory& t, const TrackModel& track) {
  for (std::size_t k = 1; k < t.states.size(); ++k) {
    if (!track.in_track(t.states[k])) return true;
  }
  return false;
}

void check_common_horizon(std::span<const Trajectory> t1, std::span<const Trajectory> t2) {
  if (t1.empty() || t2.empty()) throw ValidationError("cannot classify an empty trajectory set");
  const int h = t1.front().horizon();
  for (const auto& t : t1) {
    if (t.horizon() != h) throw ValidationError("trajectory horizons differ within player 1's set");
  }
  for (const auto& t : t2) {
    if (t.horizon() != h) throw ValidationError("trajectory horizons differ across players");
  }
}

}  // namespace

PairClassification classify_pairs(std::span<const Trajectory> t1, std::span<const Trajectory> t2,
                                  const TrackModel& track, BoxShape shape) {
  check_common_horizon(t1, t2);
  PairClassification cls;
  cls.n = static_cast<int>(t1.size());
  cls.m = static_cast<int>(t2.size());
  cls.off_track1.resize(t1.size());
  cls.off_track2.resize(t2.size());
  cls.collide.assign(t1.size() * t2.size(), 0);
  cls.slack = Matrix(cls.n, cls.m, 0.0);
  cls.progress1.resize(t1.size());
  cls.progress2.resize(t2.size());

  for (std::size_t i = 0; i < t1.size(); ++i) {
    cls.off_track1[i] = leaves_track(t1[i], track) ? 1 : 0;
    cls.progress1[i] = track.progress(t1[i].terminal());
  }
  for (std::size_t j = 0; j < t2.size(); ++j) {
    cls.off_track2[j] = leaves_track(t2[j], track) ? 1 : 0;
    cls.progress2[j] = track.progress(t2[j].terminal());
  }
  const int horizon = t1.front().horizon();
  for (std::size_t i = 0; i < t1.size(); ++i) {
    for (std::size_t j = 0; j < t2.size(); ++j) {
      double slack = 0.0;
      bool hit = false;
      for (int k = 1; k <= horizon; ++k) {
        ++cls.distance_checks;
        const OrientedBox b1 = box_at(t1[i].states[static_cast<std::size_t>(k)], shape);
        const OrientedBox b2 = box_at(t2[j].states[static_cast<std::size_t>(k)], shape);
        if (!pair_collides(b1, b2)) continue;
        const double d = signed_distance(b1, b2);
        if (d < 0.0) {
          hit = true;
          slack -= d;
        }
      }
      cls.collide[i * t2.size() + j] = hit ? 1 : 0;
      cls.slack.at(static_cast<int>(i), static_cast<int>(j)) = slack;
    }
  }
  return cls;
}

PairClassification classify_row(const Trajectory& leader, std::span<const Trajectory> t2,
                                const TrackModel& track, BoxShape shape) {
  return classify_pairs(std::span<const Trajectory>(&leader, 1), t2, track, shape);
}

std::vector<double> PayoffMatrices::row_payoffs() const {
  std::vector<double> out(static_cast<std::size_t>(a.rows()));
  for (int i = 0; i < a.rows(); ++i) out[static_cast<std::size_t>(i)] = a.at(i, 0);
  return out;
}

namespace {

void check_parameter_domination(const PairClassification& cls, const GameParams& params) {
  double min_progress = std::numeric_limits<double>::infinity();
  for (double p : cls.progress1) min_progress = std::min(min_progress, p);
  for (double p : cls.progress2) min_progress = std::min(min_progress, p);
  if (params.kappa >= min_progress || params.lambda >= min_progress) {
    std::ostringstream os;
    os << "kappa/lambda (" << params.kappa << ", " << params.lambda
       << ") must lie strictly below the minimum attainable progress " << min_progress;
    throw ValidationError(os.str());
  }
}

// Collision-free payoff of a pair per game kind (the off-track cases still
// apply; the collision case is what the soft variant replaces).
struct BasePayoff {
  double a;
  double b;
};

BasePayoff collision_free_payoff(const PairClassification& cls, const GameParams& params, int i,
                                 int j) {
  const double p1 = cls.progress1[static_cast<std::size_t>(i)];
  const double p2 = cls.progress2[static_cast<std::size_t>(j)];
  double a = p1;
  double b = p2;
  if (params.kind == GameKind::blocking) {
    if (p1 >= p2) {
      a += params.w;
    } else {
      b += params.w;
    }
  }
  if (cls.off_track1[static_cast<std::size_t>(i)] != 0) a = params.kappa;
  if (cls.off_track2[static_cast<std::size_t>(j)] != 0) b = params.kappa;
  return {a, b};
}

}  // namespace

PayoffMatrices build_payoffs(const PairClassification& cls, const GameParams& params) {
  params.validate();
  check_parameter_domination(cls, params);
  PayoffMatrices out;
  out.a = Matrix(cls.n, cls.m);
  out.b = Matrix(cls.n, cls.m);
  out.flags.resize(static_cast<std::size_t>(cls.n) * static_cast<std::size_t>(cls.m));
  out.progress1 = cls.progress1;
  out.progress2 = cls.progress2;
  out.params = params;
  for (int i = 0; i < cls.n; ++i) {
    for (int j = 0; j < cls.m; ++j) {
      const BasePayoff base = collision_free_payoff(cls, params, i, j);
      double a = base.a;
      double b = base.b;
      if (cls.pair_collides(i, j)) {
        // Case order: each player's own track violation first, then collision.
        if (cls.off_track1[static_cast<std::size_t>(i)] == 0 &&
            params.kind != GameKind::sequential) {
          a = params.lambda;
        }
        if (cls.off_track2[static_cast<std::size_t>(j)] == 0) {
          b = params.lambda;
        }
      }
      out.a.at(i, j) = a;
      out.b.at(i, j) = b;
      out.flags[static_cast<std::size_t>(i) * static_cast<std::size_t>(cls.m) + static_cast<std::size_t>(j)] =
          cls.flag(i, j);
    }
  }
  return out;
}

PayoffMatrices build_soft_payoffs(const PairClassification& cls, const GameParams& params) {
  params.validate();
  check_parameter_domination(cls, params);
  PayoffMatrices out;
  out.a = Matrix(cls.n, cls.m);
  out.b = Matrix(cls.n, cls.m);
  out.flags.resize(static_cast<std::size_t>(cls.n) * static_cast<std::size_t>(cls.m));
  out.progress1 = cls.progress1;
  out.progress2 = cls.progress2;
  out.params = params;
  for (int i = 0; i < cls.n; ++i) {
    for (int j = 0; j < cls.m; ++j) {
      const BasePayoff base = collision_free_payoff(cls, params, i, j);
      const double penalty = params.sigma * cls.slack.at(i, j);
      double a = base.a;
      double b = base.b;
      if (cls.pair_collides(i, j)) {
        // The leader of the sequential game ignores collisions, soft or hard.
        if (cls.off_track1[static_cast<std::size_t>(i)] == 0 &&
            params.kind != GameKind::sequential) {
          a -= penalty;
        }
        if (cls.off_track2[static_cast<std::size_t>(j)] == 0) {
          b -= penalty;
        }
      }
      out.a.at(i, j) = a;
      out.b.at(i, j) = b;
      out.flags[static_cast<std::size_t>(i) * static_cast<std::size_t>(cls.m) + static_cast<std::size_t>(j)] =
          cls.flag(i, j);
    }
  }
  return out;
}

double soft_exactness_bound(const PairClassification& cls, const GameParams& params) {
  double min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cls.n; ++i) {
    for (int j = 0; j < cls.m; ++j) {
      const double s = cls.slack.at(i, j);
      if (s > 0.0) min_slack = std::min(min_slack, s);
    }
  }
  if (!std::isfinite(min_slack)) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double p : cls.progress1) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  for (double p : cls.progress2) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (params.kind == GameKind::blocking) hi += params.w;
  lo = std::min(lo, params.kappa);  // off-track entries are finite payoffs too
  return (hi - lo) / min_slack;
}

bool check_assumption_feasible_pair(const PairClassification& cls) {
  for (int i = 0; i < cls.n; ++i) {
    for (int j = 0; j < cls.m; ++j) {
      if (cls.pair_feasible(i, j)) return true;
    }
  }
  return false;
}

bool check_assumption_seq(const PayoffMatrices& seq) {
  if (seq.params.kind != GameKind::sequential) {
    throw ValidationError("check_assumption_seq needs a sequential-game build");
  }
  const auto rows = seq.row_payoffs();
  double best = -std::numeric_limits<double>::infinity();
  for (double v : rows) best = std::max(best, v);
  if (!(best > seq.params.kappa)) return false;
  // max_j over the minimum of b across all leader-optimal rows.
  double best_reply = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < seq.cols(); ++j) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < seq.rows(); ++i) {
      if (rows[static_cast<std::size_t>(i)] == best) worst = std::min(worst, seq.b.at(i, j));
    }
    best_reply = std::max(best_reply, worst);
  }
  return best_reply > seq.params.lambda;
}

Player determine_leader(double p1_progress, double p2_progress) {
  return p1_progress >= p2_progress ? Player::p1 : Player::p2;
}

void save_matrix_csv(std::ostream& out, const Matrix& m) {
  out.precision(17);
  for (int j = 0; j < m.cols(); ++j) out << (j == 0 ? "" : ",") << "c" << (j + 1);
  out << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j == 0 ? "" : ",") << m.at(i, j);
    out << "\n";
  }
}

void save_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write matrix '" + path + "'");
  save_matrix_csv(out, m);
}

Matrix load_matrix_csv(std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split(line, ',');
    if (!header_seen) {
      header_seen = true;
      cols = fields.size();
      if (cols == 0) detail::fail_at(name, lineno, "empty header row");
      continue;
    }
    if (fields.size() != cols) {
      detail::fail_at(name, lineno, "expected " + std::to_string(cols) + " fields, got " +
                                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(cols);
    for (auto f : fields) row.push_back(detail::parse_double(f, name, lineno));
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ValidationError(name + ": missing header row");
  if (rows.empty()) throw ValidationError(name + ": matrix has no data rows");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return m;
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open matrix '" + path + "'");
  return load_matrix_csv(in, path);
}

void save_flags_csv(const std::string& path, const PayoffMatrices& game) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write flags '" + path + "'");
  for (int j = 0; j < game.cols(); ++j) out << (j == 0 ? "" : ",") << "c" << (j + 1);
  out << "\n";
  for (int i = 0; i < game.rows(); ++i) {
    for (int j = 0; j < game.cols(); ++j) {
      out << (j == 0 ? "" : ",") << to_string(game.flag(i, j));
    }
    out << "\n";
  }
}

std::vector<PairFlag> load_flags_csv(const std::string& path, int* rows, int* cols) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open flags '" + path + "'");
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::size_t ncols = 0;
  std::vector<PairFlag> flags;
  std::size_t nrows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split(line, ',');
    if (!header_seen) {
      header_seen = true;
      ncols = fields.size();
      continue;
    }
    if (fields.size() != ncols) {
      detail::fail_at(path, lineno, "expected " + std::to_string(ncols) + " fields, got " +
                                        std::to_string(fields.size()));
    }
    for (auto f : fields) flags.push_back(pair_flag_from_string(std::string(f)));
    ++nrows;
  }
  if (!header_seen) throw ValidationError(path + ": missing header row");
  if (rows != nullptr) *rows = static_cast<int>(nrows);
  if (cols != nullptr) *cols = static_cast<int>(ncols);
  return flags;
}

}  // namespace racegame
