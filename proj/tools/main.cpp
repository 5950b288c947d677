// racegame CLI: bimatrix racing-game toolbox.
//
// Subcommands:
//   solve       equilibria of payoff matrices given as CSV
//   race        one seeded receding-horizon race
//   batch       seeded race batch with aggregate metrics
//   kernel      compute and save a track viability kernel
//   primitives  generate or re-export a motion-primitive library

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include "CLI11.hpp"
#include "racegame/errors.hpp"
#include "racegame/game.hpp"
#include "racegame/kernel.hpp"
#include "racegame/motion.hpp"
#include "racegame/sim.hpp"
#include "racegame/solver.hpp"
#include "run_config.hpp"

namespace {

using namespace racegame;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text << "\n";
}

int run_solve(const std::string& a_path, const std::string& b_path, const std::string& flags_path,
              const std::string& out_path) {
  const Matrix a = load_matrix_csv(a_path);
  const Matrix b = load_matrix_csv(b_path);
  std::vector<PairFlag> flags;
  if (!flags_path.empty()) {
    int rows = 0;
    int cols = 0;
    flags = load_flags_csv(flags_path, &rows, &cols);
    if (rows != a.rows() || cols != a.cols()) {
      throw ValidationError("flags shape does not match the matrices");
    }
  }
  const EquilibriumReport report = analyze_game(a, b, flags);
  write_text(out_path, report.to_json());
  return 0;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  std::iota(seeds.begin(), seeds.end(), first);
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-player racing games: trajectory enumeration, bimatrix equilibria, races"};
  app.require_subcommand(1);

  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  app.add_option("--threads", threads, "worker threads for batches and kernel sweeps");

  // solve
  auto* solve = app.add_subcommand("solve", "equilibria of A/B payoff CSV matrices");
  std::string a_path, b_path, flags_path, solve_out;
  solve->add_option("--a", a_path, "payoff matrix of player 1 (CSV)")->required();
  solve->add_option("--b", b_path, "payoff matrix of player 2 (CSV)")->required();
  solve->add_option("--flags", flags_path, "per-pair feasibility flags (CSV)");
  solve->add_option("--out", solve_out, "report JSON path (default stdout)");

  // shared race/batch options
  std::string config_path, log_out, metrics_out, per_race_out;
  racegame::cli::Overrides ov;
  std::uint64_t seed = 0;
  bool no_timing = false;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config JSON")->required();
    cmd->add_option("--duration", ov.duration_steps, "steps per race");
    cmd->add_option("--game", ov.game_kind, "sequential|cooperative|blocking");
    cmd->add_option("--concept", ov.equilibrium, "stackelberg|nash_ror|sequential");
    cmd->add_option("--soft", ov.soft, "soft collision constraints (true/false)");
    cmd->add_option("--sigma", ov.sigma, "soft-constraint weight");
    cmd->add_option("--w", ov.w, "blocking reward");
    cmd->add_option("--horizon", ov.horizon, "prediction steps");
  };

  auto* race = app.add_subcommand("race", "run one seeded race");
  add_overrides(race);
  race->add_option("--seed", seed, "race seed");
  race->add_option("--out", log_out, "per-step log CSV path");
  race->add_option("--metrics", metrics_out, "metrics JSON path");

  auto* batch = app.add_subcommand("batch", "run a seed range and aggregate metrics");
  add_overrides(batch);
  std::uint64_t seed0 = 0;
  int num_seeds = 1;
  batch->add_option("--seed0", seed0, "first seed");
  batch->add_option("--seeds", num_seeds, "number of seeds")->required();
  batch->add_option("--metrics", metrics_out, "metrics JSON path (default stdout)");
  batch->add_option("--per-race", per_race_out, "per-race table CSV path");
  batch->add_flag("--no-timing", no_timing, "omit timing fields from the metrics JSON");

  auto* kernel = app.add_subcommand("kernel", "compute and save the track viability kernel");
  std::string kernel_out;
  int kernel_player = 0;
  kernel->add_option("--config", config_path, "run config JSON")->required();
  kernel->add_option("--player", kernel_player, "player whose library to use (0 or 1)")
      ->check(CLI::Range(0, 1));
  kernel->add_option("--out", kernel_out, "kernel file path")->required();

  auto* prims = app.add_subcommand("primitives", "generate or re-export a primitive library");
  std::string prims_import, prims_out;
  prims->add_option("--config", config_path, "run config JSON (library section)");
  prims->add_option("--import", prims_import, "existing library file to re-export");
  prims->add_option("--out", prims_out, "library file path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      return run_solve(a_path, b_path, flags_path, solve_out);
    }
    if (race->parsed()) {
      ov.seed = seed;
      auto resolved = racegame::cli::load_run_config(config_path, ov, threads);
      const RaceLog log = run_race(resolved.race);
      if (!log_out.empty()) log.save_csv(log_out);
      if (!metrics_out.empty()) {
        const RaceLog logs[] = {log};
        const RaceMetrics metrics = aggregate_metrics(logs, resolved.race);
        write_text(metrics_out, metrics.to_json(true));
      }
      if (log_out.empty() && metrics_out.empty()) {
        log.to_csv(std::cout);
      }
      return 0;
    }
    if (batch->parsed()) {
      auto resolved = racegame::cli::load_run_config(config_path, ov, threads);
      const auto seeds = seed_range(seed0, num_seeds);
      std::vector<RaceSummary> per_race;
      const RaceMetrics metrics = run_batch(resolved.race, seeds, threads, &per_race);
      write_text(metrics_out, metrics.to_json(!no_timing));
      if (!per_race_out.empty()) save_per_race_csv(per_race_out, per_race);
      return 0;
    }
    if (kernel->parsed()) {
      auto resolved = racegame::cli::load_run_config(config_path, {}, threads);
      if (!resolved.kernel_spec_given) {
        throw ValidationError("config has no 'kernel' section");
      }
      const auto& setup = resolved.race.players[static_cast<std::size_t>(kernel_player)];
      const GridKernel k =
          GridKernel::compute(*resolved.race.track, *setup.library, resolved.kernel_spec, threads);
      k.save(kernel_out);
      std::cerr << "kernel: " << k.member_count() << "/" << k.cell_count() << " cells, "
                << k.sweeps() << " sweeps\n";
      return 0;
    }
    if (prims->parsed()) {
      if (!prims_import.empty()) {
        PrimitiveLibrary::load(prims_import).save(prims_out);
        return 0;
      }
      if (config_path.empty()) {
        throw ValidationError("primitives needs --config or --import");
      }
      auto resolved = racegame::cli::load_run_config(config_path, {}, threads);
      resolved.race.players[0].library->save(prims_out);
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
