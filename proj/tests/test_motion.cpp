#include "racegame/motion.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "racegame/errors.hpp"
#include "test_tracks.hpp"

using namespace racegame;
using namespace racegame::testing;

namespace {

const TrackModel& big_track() {
  static const TrackModel track = rectangle_track(40.0, 30.0, 5.0);
  return track;
}

}  // namespace

TEST_CASE("library generation") {
  SUBCASE("single-cell grid yields one self-looping primitive") {
    const auto lib = PrimitiveLibrary::generate({1.0}, {0.0}, 2.0, 2.0, 0.16);
    CHECK(lib.size() == 1);
    REQUIRE(lib.successors(0).size() == 1);
    CHECK(lib.successors(0)[0] == 0);
  }
  SUBCASE("acceleration limit cuts cross edges") {
    // |dv| = 1 > accel_limit * duration = 0.5: two isolated self-loops.
    const auto lib = PrimitiveLibrary::generate({1.0, 2.0}, {0.0}, 0.5 / 0.16, 2.0, 0.16);
    REQUIRE(lib.size() == 2);
    for (std::size_t q = 0; q < 2; ++q) {
      REQUIRE(lib.successors(q).size() == 1);
      CHECK(lib.successors(q)[0] == static_cast<int>(q));
    }
  }
  SUBCASE("3 x 43 grid gives the 129-primitive library size") {
    std::vector<double> speeds{1.0, 2.0, 3.0};
    std::vector<double> yaws;
    for (int k = 0; k < 43; ++k) yaws.push_back(-4.2 + 0.2 * k);
    const auto lib = PrimitiveLibrary::generate(speeds, yaws, 4.0, 8.0, 0.16);
    CHECK(lib.size() == 129);
  }
  SUBCASE("empty grids are rejected") {
    CHECK_THROWS_AS(PrimitiveLibrary::generate({}, {0.0}, 1, 1, 0.16), ValidationError);
    CHECK_THROWS_AS(PrimitiveLibrary::generate({1.0}, {}, 1, 1, 0.16), ValidationError);
  }
}

TEST_CASE("step geometry") {
  const TrackModel& track = big_track();
  SUBCASE("straight") {
    const CarPose start{0.5, 0.1, 0.0, 0, 0};
    const MotionPrimitive prim{0, 1.0, 0.0, 0.16};
    const CarPose next = step_primitive(start, prim, track);
    CHECK(next.x == doctest::Approx(0.66).epsilon(1e-12));
    CHECK(next.y == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(next.heading == doctest::Approx(0.0));
    CHECK(next.mode == 0);
  }
  SUBCASE("half circle") {
    const double speed = 1.3;
    const double duration = 0.4;
    const double yaw = M_PI / duration;
    const CarPose start{3.0, 0.2, 0.0, 0, 0};
    const CarPose next = step_primitive(start, MotionPrimitive{1, speed, yaw, duration}, track);
    CHECK(next.x == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(next.y == doctest::Approx(0.2 + 2.0 * speed / yaw).epsilon(1e-9));
    CHECK(std::abs(wrap_angle(next.heading - M_PI)) < 1e-9);
  }
  SUBCASE("arc endpoint matches the integrator oracle") {
    const CarPose start{1.0, 0.5, 0.3, 0, 0};
    const MotionPrimitive prim{2, 1.0, 0.5, 0.16};
    const CarPose next = step_primitive(start, prim, track);
    const CarPose ref = oracle_integrate_primitive(start, 1.0, 0.5, 0.16);
    CHECK(next.x == doctest::Approx(ref.x).epsilon(1e-9));
    CHECK(next.y == doctest::Approx(ref.y).epsilon(1e-9));
    CHECK(next.heading == doctest::Approx(ref.heading).epsilon(1e-9));
  }
  SUBCASE("traversed arclength equals speed * duration") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> speed(0.2, 3.0);
    std::uniform_real_distribution<double> yaw(-4.0, 4.0);
    for (int k = 0; k < 50; ++k) {
      const double v = speed(rng);
      const double w = yaw(rng);
      const CarPose start{2.0, 1.0, 0.7, 0, 0};
      // Chord-sum the step at fine resolution.
      double length = 0.0;
      CarPose prev = start;
      const int pieces = 2000;
      for (int p = 1; p <= pieces; ++p) {
        const CarPose q = oracle_integrate_primitive(start, v, w, 0.16 * p / pieces, 64);
        length += std::hypot(q.x - prev.x, q.y - prev.y);
        prev = q;
      }
      CHECK(length == doctest::Approx(v * 0.16).epsilon(1e-6));
    }
  }
}

TEST_CASE("enumeration") {
  const TrackModel& track = big_track();
  SUBCASE("single self-loop primitive yields one trajectory") {
    const auto lib = PrimitiveLibrary::generate({1.0}, {0.0}, 1.0, 1.0, 0.16);
    const CarPose start{1.0, 1.0, 0.0, 0, 0};
    const auto trajs = enumerate_trajectories(start, lib, 3, track);
    REQUIRE(trajs.size() == 1);
    CHECK(trajs[0].modes == std::vector<int>{0, 0, 0});
    CHECK(trajs[0].states.size() == 4);
  }
  SUBCASE("uniform branching yields b^N trajectories in lexicographic order") {
    const auto lib = PrimitiveLibrary::generate({1.0}, {-0.5, 0.0, 0.5}, 10.0, 10.0, 0.16);
    REQUIRE(lib.size() == 3);
    const CarPose start{1.0, 1.0, 0.0, 1, 0};
    const auto trajs = enumerate_trajectories(start, lib, 3, track);
    REQUIRE(trajs.size() == 27);
    for (std::size_t t = 1; t < trajs.size(); ++t) {
      CHECK(trajs[t - 1].modes < trajs[t].modes);  // strictly increasing mode sequences
    }
    CHECK(count_trajectories(1, lib, 3) == 27);
  }
  SUBCASE("automaton soundness on outputs") {
    const auto lib = PrimitiveLibrary::generate({1.0, 1.5}, {-1.0, 0.0, 1.0}, 0.51 / 0.16,
                                                1.01 / 0.16, 0.16);
    const CarPose start{1.0, 1.0, 0.0, 0, 0};
    const auto trajs = enumerate_trajectories(start, lib, 3, track);
    CHECK(!trajs.empty());
    for (const auto& t : trajs) {
      int prev = start.mode;
      for (std::size_t k = 0; k < t.modes.size(); ++k) {
        const auto succ = lib.successors(lib.index_of(prev));
        bool admissible = false;
        for (int s : succ) {
          if (lib.primitive(static_cast<std::size_t>(s)).id == t.modes[k]) admissible = true;
        }
        CHECK(admissible);
        prev = t.modes[k];
        // states[k+1] replays step_primitive(states[k], modes[k]).
        const CarPose replay =
            step_primitive(t.states[k], lib.primitive(lib.index_of(t.modes[k])), track);
        CHECK(replay.x == doctest::Approx(t.states[k + 1].x).epsilon(1e-12));
        CHECK(replay.y == doctest::Approx(t.states[k + 1].y).epsilon(1e-12));
      }
    }
  }
  SUBCASE("determinism") {
    const auto lib = PrimitiveLibrary::generate({1.0, 1.5}, {-1.0, 0.0, 1.0}, 5.0, 8.0, 0.16);
    const CarPose start{1.0, 1.0, 0.0, 0, 0};
    const auto a = enumerate_trajectories(start, lib, 3, track);
    const auto b = enumerate_trajectories(start, lib, 3, track);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(a[t].modes == b[t].modes);
  }
  SUBCASE("pruned output is an order-preserving subsequence") {
    const auto lib = PrimitiveLibrary::generate({1.0, 1.5}, {-1.0, 0.0, 1.0}, 5.0, 8.0, 0.16);
    const CarPose start{1.0, 1.0, 0.0, 0, 0};
    const auto full = enumerate_trajectories(start, lib, 3, track);
    // Deterministic pseudo-random pruner on the pose bits.
    const PosePruner pruner = [](const CarPose& pose) {
      const auto h = std::hash<double>{}(pose.x) ^ std::hash<double>{}(pose.y);
      return (h % 3) != 0;
    };
    const auto pruned = enumerate_trajectories(start, lib, 3, track, pruner);
    CHECK(pruned.size() < full.size());
    std::size_t cursor = 0;
    for (const auto& p : pruned) {
      bool found = false;
      while (cursor < full.size()) {
        if (full[cursor].modes == p.modes) {
          found = true;
          ++cursor;
          break;
        }
        ++cursor;
      }
      CHECK(found);
    }
  }
  SUBCASE("all-pruned enumeration is empty") {
    const auto lib = PrimitiveLibrary::generate({1.0}, {0.0}, 1.0, 1.0, 0.16);
    const CarPose start{1.0, 1.0, 0.0, 0, 0};
    const auto trajs =
        enumerate_trajectories(start, lib, 2, track, [](const CarPose&) { return false; });
    CHECK(trajs.empty());
  }
  SUBCASE("129-mode fully connected automaton has 129^3 leaves") {
    std::vector<double> speeds{1.0, 2.0, 3.0};
    std::vector<double> yaws;
    for (int k = 0; k < 43; ++k) yaws.push_back(-4.2 + 0.2 * k);
    const auto lib = PrimitiveLibrary::generate(speeds, yaws, 1e6, 1e6, 0.16);
    REQUIRE(lib.size() == 129);
    CHECK(count_trajectories(0, lib, 3) == 129ULL * 129ULL * 129ULL);
  }
}

TEST_CASE("library file round trip") {
  const auto lib = PrimitiveLibrary::generate({0.8, 1.3}, {-0.9, 0.0, 0.9}, 4.0, 7.0, 0.16);
  std::ostringstream out;
  lib.save(out);
  std::istringstream in(out.str());
  const auto loaded = PrimitiveLibrary::load(in, "roundtrip");
  REQUIRE(loaded.size() == lib.size());
  for (std::size_t q = 0; q < lib.size(); ++q) {
    CHECK(loaded.primitive(q).id == lib.primitive(q).id);
    CHECK(loaded.primitive(q).speed == lib.primitive(q).speed);
    CHECK(loaded.primitive(q).yaw_rate == lib.primitive(q).yaw_rate);
    CHECK(loaded.primitive(q).duration == lib.primitive(q).duration);
    REQUIRE(loaded.successors(q).size() == lib.successors(q).size());
    for (std::size_t s = 0; s < lib.successors(q).size(); ++s) {
      CHECK(loaded.successors(q)[s] == lib.successors(q)[s]);
    }
  }
  // Saving the loaded library again reproduces the bytes.
  std::ostringstream out2;
  loaded.save(out2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("library file errors") {
  SUBCASE("missing header") {
    std::istringstream in("prim 0 1.0 0.0 0.16 1 0\n");
    CHECK_THROWS_AS(PrimitiveLibrary::load(in, "bad"), ValidationError);
  }
  SUBCASE("unknown successor id") {
    std::istringstream in("racegame-primitives 1\nprim 0 1.0 0.0 0.16 1 7\n");
    CHECK_THROWS_AS(PrimitiveLibrary::load(in, "bad"), ValidationError);
  }
  SUBCASE("count mismatch") {
    std::istringstream in("racegame-primitives 1\ncount 2\nprim 0 1.0 0.0 0.16 1 0\n");
    CHECK_THROWS_AS(PrimitiveLibrary::load(in, "bad"), ValidationError);
  }
}

TEST_CASE("braking successor picks minimal speed, then minimal turn") {
  const auto lib = PrimitiveLibrary::generate({1.0, 1.5}, {-1.0, 0.0, 1.0}, 10.0, 10.0, 0.16);
  // From any mode everything is admissible; minimum speed 1.0, yaw 0 -> id 1.
  const std::size_t idx = lib.index_of(lib.primitive(4).id);
  const std::size_t brake = lib.braking_successor(idx);
  CHECK(lib.primitive(brake).speed == doctest::Approx(1.0));
  CHECK(lib.primitive(brake).yaw_rate == doctest::Approx(0.0));
}

TEST_CASE("speed-capped copy keeps the automaton total") {
  const auto lib = PrimitiveLibrary::generate({1.0, 2.0, 3.0}, {-1.0, 0.0, 1.0}, 1.01 / 0.16,
                                              1.01 / 0.16, 0.16);
  const auto capped = lib.speed_capped(2.0);
  CHECK(capped.size() == 6);
  for (std::size_t q = 0; q < capped.size(); ++q) {
    CHECK(capped.primitive(q).speed <= 2.0);
    CHECK(!capped.successors(q).empty());
    for (int s : capped.successors(q)) {
      CHECK(capped.primitive(static_cast<std::size_t>(s)).speed <= 2.0);
    }
  }
  CHECK_THROWS_AS(lib.speed_capped(0.5), ValidationError);
}
