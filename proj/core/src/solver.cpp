#include "racegame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "racegame/errors.hpp"

namespace racegame {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void count_a(SolveStats* stats, std::uint64_t k = 1) {
  if (stats != nullptr) stats->reads_a += k;
}
void count_b(SolveStats* stats, std::uint64_t k = 1) {
  if (stats != nullptr) stats->reads_b += k;
}

void check_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || a.cols() == 0) throw ValidationError("payoff matrices must be non-empty");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("payoff matrices must agree in shape");
  }
}

}  // namespace

std::vector<StrategyPair> stackelberg(const Matrix& a, const Matrix& b, SolveStats* stats) {
  check_shape(a, b);
  const int n = a.rows();
  const int m = a.cols();
  std::vector<std::vector<int>> best_response(static_cast<std::size_t>(n));
  std::vector<double> pessimistic(static_cast<std::size_t>(n), kNegInf);
  for (int i = 0; i < n; ++i) {
    double best_b = kNegInf;
    for (int j = 0; j < m; ++j) {
      count_b(stats);
      const double v = b.at(i, j);
      if (v > best_b) {
        best_b = v;
        best_response[static_cast<std::size_t>(i)].clear();
      }
      if (v == best_b) best_response[static_cast<std::size_t>(i)].push_back(j);
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int j : best_response[static_cast<std::size_t>(i)]) {
      count_a(stats);
      worst = std::min(worst, a.at(i, j));
    }
    pessimistic[static_cast<std::size_t>(i)] = worst;
  }
  const double v_star = *std::max_element(pessimistic.begin(), pessimistic.end());
  std::vector<StrategyPair> out;
  for (int i = 0; i < n; ++i) {
    if (pessimistic[static_cast<std::size_t>(i)] != v_star) continue;
    for (int j : best_response[static_cast<std::size_t>(i)]) out.push_back({i, j});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StrategyPair> nash_pure(const Matrix& a, const Matrix& b, SolveStats* stats) {
  check_shape(a, b);
  const int n = a.rows();
  const int m = a.cols();
  std::vector<double> col_max(static_cast<std::size_t>(m), kNegInf);
  std::vector<double> row_max(static_cast<std::size_t>(n), kNegInf);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      count_a(stats);
      count_b(stats);
      col_max[static_cast<std::size_t>(j)] = std::max(col_max[static_cast<std::size_t>(j)], a.at(i, j));
      row_max[static_cast<std::size_t>(i)] = std::max(row_max[static_cast<std::size_t>(i)], b.at(i, j));
    }
  }
  std::vector<StrategyPair> out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      count_a(stats);
      count_b(stats);
      if (a.at(i, j) == col_max[static_cast<std::size_t>(j)] &&
          b.at(i, j) == row_max[static_cast<std::size_t>(i)]) {
        out.push_back({i, j});
      }
    }
  }
  return out;  // already lexicographic by construction
}

const char* to_string(Betterness b) {
  switch (b) {
    case Betterness::better: return "better";
    case Betterness::worse: return "worse";
    case Betterness::equal: return "equal";
    case Betterness::incomparable: return "incomparable";
  }
  return "?";
}

Betterness better(StrategyPair p, StrategyPair q, const Matrix& a, const Matrix& b) {
  const double ap = a.at(p.i, p.j);
  const double bp = b.at(p.i, p.j);
  const double aq = a.at(q.i, q.j);
  const double bq = b.at(q.i, q.j);
  if (ap == aq && bp == bq) return Betterness::equal;
  if (ap >= aq && bp >= bq) return Betterness::better;
  if (ap <= aq && bp <= bq) return Betterness::worse;
  return Betterness::incomparable;
}

std::vector<StrategyPair> rules_of_the_road(std::span<const StrategyPair> nash, const Matrix& a) {
  if (nash.empty()) return {};
  double best = kNegInf;
  for (const auto& p : nash) best = std::max(best, a.at(p.i, p.j));
  std::vector<StrategyPair> out;
  for (const auto& p : nash) {
    if (a.at(p.i, p.j) == best) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<StrategyPair> sequential_maximization(std::span<const double> a_rows, const Matrix& b,
                                                  SolveStats* stats) {
  if (a_rows.empty()) throw ValidationError("sequential maximization needs at least one row payoff");
  if (static_cast<int>(a_rows.size()) != b.rows()) {
    throw ValidationError("row payoff count does not match the follower matrix");
  }
  double best = kNegInf;
  for (double v : a_rows) {
    count_a(stats);
    best = std::max(best, v);
  }
  std::vector<StrategyPair> out;
  std::vector<int> replies;
  for (int i = 0; i < static_cast<int>(a_rows.size()); ++i) {
    if (a_rows[static_cast<std::size_t>(i)] != best) continue;
    double best_b = kNegInf;
    replies.clear();
    for (int j = 0; j < b.cols(); ++j) {
      count_b(stats);
      const double v = b.at(i, j);
      if (v > best_b) {
        best_b = v;
        replies.clear();
      }
      if (v == best_b) replies.push_back(j);
    }
    for (int j : replies) out.push_back({i, j});
  }
  std::sort(out.begin(), out.end());
  return out;
}

BlockingResult find_blocking_pairs(const PairClassification& cls, StrategyPair coop_stackelberg,
                                   const Matrix& coop_b, double lambda) {
  BlockingResult result;
  const double p1_cg = cls.progress1[static_cast<std::size_t>(coop_stackelberg.i)];
  const double p2_cg = cls.progress2[static_cast<std::size_t>(coop_stackelberg.j)];
  if (!(p1_cg < p2_cg)) return result;  // condition (i): the leader gets overtaken
  for (int i = 0; i < cls.n; ++i) {
    for (int j = 0; j < cls.m; ++j) {
      if (!cls.pair_feasible(i, j)) continue;                                       // (iii)
      if (!(cls.progress1[static_cast<std::size_t>(i)] > cls.progress2[static_cast<std::size_t>(j)])) {
        continue;  // (ii)
      }
      bool blocks = true;
      for (int jc = 0; jc < cls.m; ++jc) {
        if (cls.progress2[static_cast<std::size_t>(jc)] > cls.progress2[static_cast<std::size_t>(j)] &&
            !(coop_b.at(i, jc) <= lambda)) {
          blocks = false;  // (iv): a faster follower reply survives
          break;
        }
      }
      if (blocks) result.all.push_back({i, j});
    }
  }
  if (!result.all.empty()) {
    StrategyPair best = result.all.front();
    for (const auto& p : result.all) {
      const double cur = cls.progress1[static_cast<std::size_t>(p.i)];
      const double ref = cls.progress1[static_cast<std::size_t>(best.i)];
      if (cur > ref) best = p;
    }
    result.best = best;
  }
  return result;
}

EquilibriumReport analyze_game(const Matrix& a, const Matrix& b, std::span<const PairFlag> flags) {
  check_shape(a, b);
  if (!flags.empty() &&
      flags.size() != static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(a.cols())) {
    throw ValidationError("flags table does not match the matrix shape");
  }
  EquilibriumReport rep;
  rep.n = a.rows();
  rep.m = a.cols();
  rep.stackelberg_pairs = stackelberg(a, b);
  rep.stackelberg_announced = rep.stackelberg_pairs.front();
  {
    // Pessimistic leader value: min of a over the follower's ties at the
    // announced row.
    const int i = rep.stackelberg_announced.i;
    double best_b = kNegInf;
    for (int j = 0; j < b.cols(); ++j) best_b = std::max(best_b, b.at(i, j));
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < b.cols(); ++j) {
      if (b.at(i, j) == best_b) worst = std::min(worst, a.at(i, j));
    }
    rep.stackelberg_pessimistic_value = worst;
    rep.stackelberg_realized_a = a.at(rep.stackelberg_announced.i, rep.stackelberg_announced.j);
    rep.stackelberg_realized_b = b.at(rep.stackelberg_announced.i, rep.stackelberg_announced.j);
  }
  rep.nash_pairs = nash_pure(a, b);
  rep.nash_ror = rules_of_the_road(rep.nash_pairs, a);
  for (std::size_t x = 0; x < rep.nash_pairs.size(); ++x) {
    for (std::size_t y = x + 1; y < rep.nash_pairs.size(); ++y) {
      rep.nash_comparisons.push_back(
          {rep.nash_pairs[x], rep.nash_pairs[y], better(rep.nash_pairs[x], rep.nash_pairs[y], a, b)});
    }
  }
  rep.sequential_applicable = true;
  for (int i = 0; i < a.rows() && rep.sequential_applicable; ++i) {
    for (int j = 1; j < a.cols(); ++j) {
      if (a.at(i, j) != a.at(i, 0)) {
        rep.sequential_applicable = false;
        break;
      }
    }
  }
  if (rep.sequential_applicable) {
    std::vector<double> rows(static_cast<std::size_t>(a.rows()));
    for (int i = 0; i < a.rows(); ++i) rows[static_cast<std::size_t>(i)] = a.at(i, 0);
    rep.sequential_pairs = sequential_maximization(rows, b);
  }
  rep.flags.assign(flags.begin(), flags.end());
  return rep;
}

namespace {

nlohmann::json pairs_json(std::span<const StrategyPair> pairs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pairs) arr.push_back({p.i + 1, p.j + 1});
  return arr;
}

}  // namespace

std::string EquilibriumReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n"] = n;
  j["m"] = m;
  j["stackelberg"] = {
      {"pairs", pairs_json(stackelberg_pairs)},
      {"announced", {stackelberg_announced.i + 1, stackelberg_announced.j + 1}},
      {"pessimistic_value", stackelberg_pessimistic_value},
      {"realized", {{"a", stackelberg_realized_a}, {"b", stackelberg_realized_b}}},
  };
  j["nash"] = {{"pairs", pairs_json(nash_pairs)}};
  {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& cmp : nash_comparisons) {
      verdicts.push_back({{"pair", {cmp.p.i + 1, cmp.p.j + 1}},
                          {"vs", {cmp.q.i + 1, cmp.q.j + 1}},
                          {"verdict", to_string(cmp.verdict)}});
    }
    j["nash"]["betterness"] = verdicts;
  }
  j["nash_rules_of_the_road"] = {{"pairs", pairs_json(nash_ror)}};
  if (!nash_ror.empty()) {
    j["nash_rules_of_the_road"]["announced"] = {nash_ror.front().i + 1, nash_ror.front().j + 1};
  }
  j["sequential"] = {{"applicable", sequential_applicable}, {"pairs", pairs_json(sequential_pairs)}};
  if (best_blocking.has_value()) {
    j["best_blocking"] = {best_blocking->i + 1, best_blocking->j + 1};
  } else {
    j["best_blocking"] = nullptr;
  }
  if (!flags.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int jj = 0; jj < m; ++jj) {
        row.push_back(to_string(flags[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
                                      static_cast<std::size_t>(jj)]));
      }
      rows.push_back(row);
    }
    j["feasibility"] = rows;
  }
  return j.dump(2);
}

bool TheoremReport::all_passed() const {
  for (const auto& c : clauses) {
    if (c.applicable && !c.passed) return false;
  }
  return true;
}

const TheoremReport::Clause& TheoremReport::clause(const std::string& name) const {
  for (const auto& c : clauses) {
    if (c.name == name) return c;
  }
  throw Error("unknown clause '" + name + "'");
}

namespace {

std::string pair_str(StrategyPair p) {
  std::ostringstream os;
  os << "(" << p.i + 1 << "," << p.j + 1 << ")";
  return os.str();
}

std::string set_str(std::span<const StrategyPair> pairs) {
  std::ostringstream os;
  os << "{";
  for (std::size_t k = 0; k < pairs.size(); ++k) os << (k ? "," : "") << pair_str(pairs[k]);
  os << "}";
  return os.str();
}

}  // namespace

TheoremReport verify_theorems(const Scenario& scenario) {
  const PairClassification& cls = scenario.cls;
  GameParams seq_params{scenario.kappa, scenario.lambda, 0.0, 0.0, GameKind::sequential};
  GameParams coop_params{scenario.kappa, scenario.lambda, 0.0, 0.0, GameKind::cooperative};
  GameParams block_params{scenario.kappa, scenario.lambda, scenario.w, 0.0, GameKind::blocking};
  const PayoffMatrices seq = build_payoffs(cls, seq_params);
  const PayoffMatrices coop = build_payoffs(cls, coop_params);
  const PayoffMatrices block = build_payoffs(cls, block_params);

  const bool ass_a = check_assumption_feasible_pair(cls);
  const bool ass_b = check_assumption_seq(seq);

  const auto seq_set = sequential_maximization(seq.row_payoffs(), seq.b);
  const auto coop_st = stackelberg(coop.a, coop.b);
  const auto coop_nash = nash_pure(coop.a, coop.b);
  const auto coop_ror = rules_of_the_road(coop_nash, coop.a);
  const auto block_st = stackelberg(block.a, block.b);
  const auto block_nash = nash_pure(block.a, block.b);

  TheoremReport rep;

  {  // t1a
    TheoremReport::Clause c{.name = "t1a", .applicable = ass_a};
    if (ass_a) {
      for (const auto& p : coop_st) {
        if (!cls.pair_feasible(p.i, p.j)) {
          c.passed = false;
          c.witness = "infeasible Stackelberg pair " + pair_str(p);
        }
      }
      std::vector<StrategyPair> feasible_nash;
      std::vector<StrategyPair> infeasible_nash;
      for (const auto& p : coop_nash) {
        (cls.pair_feasible(p.i, p.j) ? feasible_nash : infeasible_nash).push_back(p);
      }
      if (feasible_nash.empty()) {
        c.passed = false;
        c.witness = "no feasible Nash equilibrium; nash=" + set_str(coop_nash);
      }
      for (const auto& f : feasible_nash) {
        for (const auto& g : infeasible_nash) {
          if (better(f, g, coop.a, coop.b) != Betterness::better) {
            c.passed = false;
            c.witness = "feasible Nash " + pair_str(f) + " not better than " + pair_str(g);
          }
        }
      }
    }
    rep.clauses.push_back(std::move(c));
  }

  {  // t1b
    TheoremReport::Clause c{.name = "t1b", .applicable = ass_b};
    if (ass_b) {
      const bool eq1 = seq_set == coop_st;
      const bool eq2 = coop_st == coop_ror;
      const bool subset = std::includes(coop_nash.begin(), coop_nash.end(), coop_ror.begin(), coop_ror.end());
      if (seq_set.empty() || !eq1 || !eq2 || !subset) {
        c.passed = false;
        c.witness = "seq=" + set_str(seq_set) + " st=" + set_str(coop_st) +
                    " ror=" + set_str(coop_ror) + " nash=" + set_str(coop_nash);
      }
    }
    rep.clauses.push_back(std::move(c));
  }

  const StrategyPair cg = coop_st.front();
  const double p1_cg = cls.progress1[static_cast<std::size_t>(cg.i)];
  const double p2_cg = cls.progress2[static_cast<std::size_t>(cg.j)];
  const BlockingResult blocking = find_blocking_pairs(cls, cg, coop.b, scenario.lambda);

  {  // t2a
    TheoremReport::Clause c{.name = "t2a", .applicable = ass_a};
    if (ass_a) {
      if (p1_cg > p2_cg || blocking.all.empty()) {
        if (block_st != coop_st) {
          c.passed = false;
          c.witness = "expected blocking Stackelberg " + set_str(coop_st) + ", got " + set_str(block_st);
        }
      } else {
        const StrategyPair ib = *blocking.best;
        const double p1_b = cls.progress1[static_cast<std::size_t>(ib.i)];
        if (p1_cg <= p1_b + scenario.w) {
          // Pessimistic leader value of the blocking game at the announced row.
          const int i0 = block_st.front().i;
          double best_b = -std::numeric_limits<double>::infinity();
          for (int j = 0; j < block.b.cols(); ++j) best_b = std::max(best_b, block.b.at(i0, j));
          double v_star = std::numeric_limits<double>::infinity();
          for (int j = 0; j < block.b.cols(); ++j) {
            if (block.b.at(i0, j) == best_b) v_star = std::min(v_star, block.a.at(i0, j));
          }
          const bool best_in = std::binary_search(block_st.begin(), block_st.end(), ib);
          if (!best_in || v_star != p1_b + scenario.w) {
            c.passed = false;
            c.witness = "blocking pair " + pair_str(ib) + " not the Stackelberg: set " +
                        set_str(block_st);
          }
        } else {
          if (block_st != coop_st) {
            c.passed = false;
            c.witness = "w below the switch but blocking Stackelberg " + set_str(block_st) +
                        " differs from " + set_str(coop_st);
          }
        }
      }
    }
    rep.clauses.push_back(std::move(c));
  }

  {  // t2b
    TheoremReport::Clause c{.name = "t2b", .applicable = ass_a};
    if (ass_a) {
      for (const auto& p : coop_st) {
        if (!std::binary_search(block_nash.begin(), block_nash.end(), p)) {
          c.passed = false;
          c.witness = "cooperative Stackelberg " + pair_str(p) + " is not a blocking-game Nash";
        }
      }
      for (const auto& p : blocking.all) {
        const bool in_coop = std::binary_search(coop_nash.begin(), coop_nash.end(), p);
        const bool in_block = std::binary_search(block_nash.begin(), block_nash.end(), p);
        if (in_coop && !in_block) {
          c.passed = false;
          c.witness = "blocking pair " + pair_str(p) + " is a cooperative Nash but not a blocking-game Nash";
        }
      }
    }
    rep.clauses.push_back(std::move(c));
  }

  return rep;
}

}  // namespace racegame
