#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "racegame/game.hpp"

namespace racegame {

// Index pair into the strategy spaces (0-based internally; reports and CSV
// headers print 1-based indices).
struct StrategyPair {
  int i = 0;
  int j = 0;
  auto operator<=>(const StrategyPair&) const = default;
};

// Payoff-element read counters for the complexity contracts.
struct SolveStats {
  std::uint64_t reads_a = 0;
  std::uint64_t reads_b = 0;
  std::uint64_t total() const { return reads_a + reads_b; }
};

// All Stackelberg equilibria with P1 as leader: i* maximizes the pessimistic
// leader payoff min over the follower's best-response set R(i), and every
// j* in R(i*) is returned. The announced pair is the lexicographic minimum.
std::vector<StrategyPair> stackelberg(const Matrix& a, const Matrix& b,
                                      SolveStats* stats = nullptr);

// All pure-strategy Nash equilibria. May be empty.
std::vector<StrategyPair> nash_pure(const Matrix& a, const Matrix& b, SolveStats* stats = nullptr);

enum class Betterness { better, worse, equal, incomparable };

const char* to_string(Betterness b);

// Componentwise payoff comparison of p against q (Def.: better needs both
// payoffs >= with at least one strict).
Betterness better(StrategyPair p, StrategyPair q, const Matrix& a, const Matrix& b);

// Subset of `nash` maximizing the leader's payoff, in lexicographic order;
// empty input passes through.
std::vector<StrategyPair> rules_of_the_road(std::span<const StrategyPair> nash, const Matrix& a);

// Two-step sequential maximization on a sequential game: i^s maximizes the
// (row-constant) leader payoff, j^s best-responds. Only the optimal rows of B
// are ever read, so the read count stays O(n + m).
std::vector<StrategyPair> sequential_maximization(std::span<const double> a_rows, const Matrix& b,
                                                  SolveStats* stats = nullptr);

struct BlockingResult {
  std::vector<StrategyPair> all;        // every pair satisfying Def. conditions (i)-(iv)
  std::optional<StrategyPair> best;     // largest leader progress, lexicographic ties
};

// Blocking pairs relative to the cooperative game: requires the cooperative
// Stackelberg pair, the cooperative follower matrix and lambda for the
// "every faster follower reply collides" test.
BlockingResult find_blocking_pairs(const PairClassification& cls, StrategyPair coop_stackelberg,
                                   const Matrix& coop_b, double lambda);

// Full equilibrium analysis of one game, as exported by the solve CLI.
struct EquilibriumReport {
  int n = 0;
  int m = 0;
  std::vector<StrategyPair> stackelberg_pairs;
  StrategyPair stackelberg_announced{};
  double stackelberg_pessimistic_value = 0.0;  // min over follower ties
  double stackelberg_realized_a = 0.0;         // payoff of the announced pair
  double stackelberg_realized_b = 0.0;
  std::vector<StrategyPair> nash_pairs;
  std::vector<StrategyPair> nash_ror;          // subset of nash_pairs
  std::vector<StrategyPair> sequential_pairs;  // filled when A is row-constant
  bool sequential_applicable = false;
  std::optional<StrategyPair> best_blocking;
  std::vector<PairFlag> flags;  // empty when unknown

  struct NashComparison {
    StrategyPair p;
    StrategyPair q;
    Betterness verdict = Betterness::incomparable;
  };
  std::vector<NashComparison> nash_comparisons;  // pairwise, p before q

  std::string to_json() const;  // 1-based indices, schema_version field
};

// Computes every report field from the matrices (flags optional; sizes must
// match when given).
EquilibriumReport analyze_game(const Matrix& a, const Matrix& b,
                               std::span<const PairFlag> flags = {});

// One scenario = classification plus shared payoff parameters; w applies to
// the blocking build.
struct Scenario {
  PairClassification cls;
  double kappa = -10.0;
  double lambda = -1.0;
  double w = 0.5;
};

struct TheoremReport {
  struct Clause {
    std::string name;
    bool applicable = false;
    bool passed = true;
    std::string witness;  // populated on failure
  };
  std::vector<Clause> clauses;
  bool all_passed() const;
  const Clause& clause(const std::string& name) const;
};

// Evaluates the equilibrium-relation clauses on one scenario:
//  t1a: under the feasible-pair assumption, all cooperative Stackelberg pairs
//       are feasible, a feasible Nash exists, and every feasible Nash is
//       better than every infeasible one;
//  t1b: under the sequential assumption, seq = coop Stackelberg = coop
//       Nash-RoR, a subset of coop Nash;
//  t2a: the blocking-game Stackelberg set matches the cooperative one, or
//       switches to the best blocking pair once w crosses the progress gap;
//  t2b: the cooperative Stackelberg pairs are blocking-game Nash equilibria,
//       and blocking pairs that are cooperative Nash stay blocking-game Nash.
TheoremReport verify_theorems(const Scenario& scenario);

}  // namespace racegame
