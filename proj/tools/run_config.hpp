#pragma once

// JSON run-config loading and resolution into live sim objects. Keys carry
// their units; unknown keys are rejected. CLI flags override file values via
// the Overrides struct.

#include <optional>
#include <string>

#include "racegame/sim.hpp"

namespace racegame::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> duration_steps;
  std::optional<std::string> game_kind;
  std::optional<std::string> equilibrium;
  std::optional<bool> soft;
  std::optional<double> sigma;
  std::optional<double> w;
  std::optional<int> horizon;
};

struct ResolvedConfig {
  RaceConfig race;
  // Grid spec used when a kernel has to be computed on the fly (also by the
  // `kernel` subcommand).
  GridSpec kernel_spec;
  bool kernel_spec_given = false;
};

// Parses, validates and resolves a config file: loads the track CSV, builds
// or loads the primitive libraries, computes or loads the per-player kernels.
// `threads` caps kernel-computation parallelism.
ResolvedConfig load_run_config(const std::string& path, const Overrides& overrides, int threads);

}  // namespace racegame::cli
