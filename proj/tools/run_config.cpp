#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "racegame/errors.hpp"

namespace racegame::cli {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (ok.find(it.key()) == ok.end()) {
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ValidationError("config: missing key '" + std::string(key) + "' in " + where);
  }
  return obj.at(key).get<T>();
}

std::shared_ptr<const PrimitiveLibrary> build_library(const json& lib) {
  reject_unknown_keys(lib, "library",
                      {"file", "speeds_mps", "yaw_rates_radps", "accel_limit_mps2",
                       "yaw_accel_limit_radps2", "duration_s"});
  if (lib.contains("file")) {
    return std::make_shared<PrimitiveLibrary>(
        PrimitiveLibrary::load(lib.at("file").get<std::string>()));
  }
  const auto speeds = require<std::vector<double>>(lib, "speeds_mps", "library");
  const auto yaws = require<std::vector<double>>(lib, "yaw_rates_radps", "library");
  const double accel = require<double>(lib, "accel_limit_mps2", "library");
  const double yaw_accel = require<double>(lib, "yaw_accel_limit_radps2", "library");
  const double duration = require<double>(lib, "duration_s", "library");
  return std::make_shared<PrimitiveLibrary>(
      PrimitiveLibrary::generate(speeds, yaws, accel, yaw_accel, duration));
}

GridSpec parse_kernel_spec(const json& k, const TrackModel& track) {
  reject_unknown_keys(k, "kernel",
                      {"cell_m", "headings", "inflation_cells", "track_margin_m", "max_sweeps"});
  GridSpec spec = GridSpec::cover(track, get_or<double>(k, "cell_m", 0.02),
                                  get_or<int>(k, "headings", 16));
  spec.inflation_cells = get_or<int>(k, "inflation_cells", 1);
  spec.track_margin_m = get_or<double>(k, "track_margin_m", -1.0);
  spec.max_sweeps = get_or<int>(k, "max_sweeps", 1000);
  return spec;
}

}  // namespace

ResolvedConfig load_run_config(const std::string& path, const Overrides& overrides, int threads) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  reject_unknown_keys(root, "the top level",
                      {"schema_version", "track", "cars", "library", "players", "kernel", "game",
                       "race"});
  const int schema = get_or<int>(root, "schema_version", 1);
  if (schema != 1) {
    throw ValidationError("config: unsupported schema_version " + std::to_string(schema));
  }

  ResolvedConfig out;
  RaceConfig& race = out.race;

  {
    const json track = require<json>(root, "track", "the top level");
    reject_unknown_keys(track, "track", {"centerline_csv", "halfwidth_m"});
    const auto csv = require<std::string>(track, "centerline_csv", "track");
    const double halfwidth = require<double>(track, "halfwidth_m", "track");
    race.track = std::make_shared<TrackModel>(TrackModel::load_csv(csv, halfwidth));
  }

  if (root.contains("cars")) {
    const json cars = root.at("cars");
    reject_unknown_keys(cars, "cars", {"length_m", "width_m"});
    race.car.length = get_or<double>(cars, "length_m", race.car.length);
    race.car.width = get_or<double>(cars, "width_m", race.car.width);
  }

  const auto base_library = build_library(require<json>(root, "library", "the top level"));

  if (root.contains("kernel")) {
    out.kernel_spec = parse_kernel_spec(root.at("kernel"), *race.track);
    out.kernel_spec_given = true;
  }

  json players = json::array({json::object(), json::object()});
  if (root.contains("players")) {
    players = root.at("players");
    if (!players.is_array() || players.size() != 2) {
      throw ValidationError("config: 'players' must be an array of two entries");
    }
  }
  for (std::size_t c = 0; c < 2; ++c) {
    const json& p = players.at(c);
    reject_unknown_keys(p, "players[" + std::to_string(c) + "]",
                        {"pruner", "profile", "speed_cap_mps", "nstep_depth", "kernel_file"});
    PlayerSetup& setup = race.players[c];
    setup.profile = get_or<std::string>(p, "profile", "aggressive");
    if (setup.profile != "aggressive" && setup.profile != "cautious") {
      throw ValidationError("config: player profile must be 'aggressive' or 'cautious'");
    }
    if (setup.profile == "cautious") {
      double cap = 0.0;
      if (p.contains("speed_cap_mps")) {
        cap = p.at("speed_cap_mps").get<double>();
      } else {
        for (const auto& prim : base_library->primitives()) cap = std::max(cap, prim.speed);
        cap *= 0.75;
      }
      setup.library = std::make_shared<PrimitiveLibrary>(base_library->speed_capped(cap));
    } else {
      setup.library = base_library;
    }
    setup.pruner = pruner_kind_from_string(get_or<std::string>(p, "pruner", "none"));
    setup.nstep_depth = get_or<int>(p, "nstep_depth", 2);
    if (setup.pruner == PrunerKind::kernel) {
      if (p.contains("kernel_file")) {
        setup.kernel = std::make_shared<GridKernel>(
            GridKernel::load(p.at("kernel_file").get<std::string>()));
      } else {
        if (!out.kernel_spec_given) {
          throw ValidationError(
              "config: kernel pruner needs either a 'kernel' section or a kernel_file");
        }
        setup.kernel = std::make_shared<GridKernel>(
            GridKernel::compute(*race.track, *setup.library, out.kernel_spec, threads));
      }
    }
  }

  if (root.contains("game")) {
    const json g = root.at("game");
    reject_unknown_keys(g, "game", {"kind", "kappa", "lambda", "w", "soft", "sigma"});
    race.game.kind = game_kind_from_string(get_or<std::string>(g, "kind", "cooperative"));
    race.game.kappa = get_or<double>(g, "kappa", race.game.kappa);
    race.game.lambda = get_or<double>(g, "lambda", race.game.lambda);
    race.game.w = get_or<double>(g, "w", race.game.w);
    race.soft = get_or<bool>(g, "soft", race.soft);
    race.game.sigma = get_or<double>(g, "sigma", race.game.sigma);
  }

  if (root.contains("race")) {
    const json r = root.at("race");
    reject_unknown_keys(r, "race",
                        {"concept", "horizon", "duration_steps", "gap_min_m", "gap_max_m",
                         "initial_speed_mps", "collision_threshold_m", "overtake_hold_steps",
                         "exec_noise_m", "seed"});
    race.equilibrium = concept_from_string(get_or<std::string>(r, "concept", "stackelberg"));
    race.horizon = get_or<int>(r, "horizon", race.horizon);
    race.duration_steps = get_or<int>(r, "duration_steps", race.duration_steps);
    race.gap_min_m = get_or<double>(r, "gap_min_m", race.gap_min_m);
    race.gap_max_m = get_or<double>(r, "gap_max_m", race.gap_max_m);
    race.initial_speed_mps = get_or<double>(r, "initial_speed_mps", race.initial_speed_mps);
    race.collision_threshold_m = get_or<double>(r, "collision_threshold_m", race.collision_threshold_m);
    race.overtake_hold_steps = get_or<int>(r, "overtake_hold_steps", race.overtake_hold_steps);
    race.exec_noise_m = get_or<double>(r, "exec_noise_m", race.exec_noise_m);
    race.seed = get_or<std::uint64_t>(r, "seed", race.seed);
  }

  if (overrides.seed) race.seed = *overrides.seed;
  if (overrides.duration_steps) race.duration_steps = *overrides.duration_steps;
  if (overrides.game_kind) race.game.kind = game_kind_from_string(*overrides.game_kind);
  if (overrides.equilibrium) race.equilibrium = concept_from_string(*overrides.equilibrium);
  if (overrides.soft) race.soft = *overrides.soft;
  if (overrides.sigma) race.game.sigma = *overrides.sigma;
  if (overrides.w) race.game.w = *overrides.w;
  if (overrides.horizon) race.horizon = *overrides.horizon;

  race.validate();
  return out;
}

}  // namespace racegame::cli
