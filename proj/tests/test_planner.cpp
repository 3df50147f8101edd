#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "coopsearch/errors.hpp"
#include "coopsearch/planner.hpp"
#include "oracles.hpp"

using namespace coopsearch;

namespace {

const GridSpec kGrid{4.0, 100, 80};
const FovGeometry kFov{40.0, 40.0, 0.0};

GaConfig rotor_ga() { return GaConfig{100, 50, 0.5, 0.5, 1e-3, 10, 2}; }
GaConfig fixed_wing_ga() { return GaConfig{300, 50, 0.9, 0.9, 1e-3, 10, 2}; }

double count_zeros(std::span<const std::int8_t> g) {
  return static_cast<double>(std::count(g.begin(), g.end(), std::int8_t{0}));
}

struct Scene {
  SearchMap map;
  FootprintCache fov{kGrid, kFov};
  ThreatModel threats{kGrid, {}};
  PlanningContext ctx;

  explicit Scene(SearchMap m) : map(std::move(m)) {
    ctx.map = &map;
    ctx.fov = &fov;
    ctx.threats = &threats;
  }
};

bool first_step_violates(const Decision& d, const GridPose& pose, const ThreatModel& threats) {
  const GridPose p = with_jump(pose, d.j);
  return threats.violates(p.cell, step(p, d.u, d.j).cell);
}

}  // namespace

TEST(GaConfig, Validation) {
  EXPECT_NO_THROW(rotor_ga().validate("/ga/rotor"));
  GaConfig bad = rotor_ga();
  bad.population = 1;
  EXPECT_THROW(bad.validate("/ga/rotor"), ScenarioError);
  bad = rotor_ga();
  bad.mutation_rate = 1.5;
  EXPECT_THROW(bad.validate("/ga/rotor"), ScenarioError);
  bad = rotor_ga();
  bad.elite = 0;
  EXPECT_THROW(bad.validate("/ga/rotor"), ScenarioError);
}

TEST(GaOptimize, CountZerosConvergesWithinGenerationBudget) {
  // Rotor operators over the full 50-generation budget.
  GaConfig cfg = rotor_ga();
  cfg.epsilon = 0.0;
  int hits = 0;
  constexpr int kSeeds = 100;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const GaResult r = ga_optimize(count_zeros, 8, cfg, rng);
    EXPECT_LE(r.generations, 50);
    if (r.best_fitness == 8.0) ++hits;
  }
  EXPECT_GE(hits, 95) << hits << " of " << kSeeds;
}

TEST(GaOptimize, StopsAfterPatienceStalledGenerations) {
  Rng rng(1);
  const GaResult r = ga_optimize([](std::span<const std::int8_t>) { return 1.0; }, 6, rotor_ga(), rng);
  EXPECT_EQ(r.generations, 1 + rotor_ga().patience);
}

TEST(GaOptimize, EvaluationBudget) {
  Rng rng(3);
  GaConfig cfg = rotor_ga();
  cfg.patience = 1000;
  const GaResult r = ga_optimize([](std::span<const std::int8_t> g) { return static_cast<double>(g[0]); }, 8, cfg, rng);
  EXPECT_EQ(r.generations, 50);
  EXPECT_LE(r.evaluations, 100u * 50u);
}

TEST(GaOptimizeProperty, ElitismKeepsPopulationBestMonotone) {
  Rng seeds(10);
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(seeds.next());
    const oracle::Instance in = oracle::random_instance(seeds.next(), 1 + trial % 8);
    FootprintCache fov(in.grid, in.fov);
    RolloutEvaluator ev(in.map, fov, in.threats, in.peers, Weights{}, RepulsionParams{});
    const GaResult r = ga_optimize([&](std::span<const std::int8_t> a) { return ev.evaluate(in.start, in.j, a).value; },
                                   in.m, rotor_ga(), rng);
    ASSERT_EQ(r.population_best.size(), static_cast<std::size_t>(r.generations));
    for (std::size_t g = 1; g < r.population_best.size(); ++g) {
      EXPECT_GE(r.population_best[g], r.population_best[g - 1]);
      EXPECT_GE(r.best_per_generation[g], r.best_per_generation[g - 1]);
    }
    EXPECT_EQ(r.best_fitness, r.best_per_generation.back());
  }
}

TEST(GaOptimizeProperty, MatchesExhaustiveEnumeration) {
  int matches = 0;
  constexpr int kInstances = 50;
  for (int i = 0; i < kInstances; ++i) {
    const int m = 1 + i % 6;
    const oracle::Instance in = oracle::random_instance(1000 + static_cast<std::uint64_t>(i), m);
    FootprintCache fov(in.grid, in.fov);
    RolloutEvaluator ev(in.map, fov, in.threats, in.peers, Weights{}, RepulsionParams{});
    auto fitness = [&](std::span<const std::int8_t> a) { return ev.evaluate(in.start, in.j, a).value; };
    const auto truth = oracle::enumerate(fitness, m);
    Rng rng(77 + static_cast<std::uint64_t>(i));
    const GaResult r = ga_optimize(fitness, m, rotor_ga(), rng);
    EXPECT_LE(r.best_fitness, truth.best);
    if (r.best_fitness == truth.best) ++matches;
  }
  EXPECT_GE(matches, 48) << matches << " of " << kInstances;
}

TEST(Decide, SingleStepHorizonMatchesExhaustiveArgmax) {
  for (int i = 0; i < 20; ++i) {
    oracle::Instance in = oracle::random_instance(500 + static_cast<std::uint64_t>(i), 1);
    FootprintCache fov(in.grid, in.fov);
    PlanningContext ctx{&in.map, &fov, &in.threats, in.peers, Weights{}, RepulsionParams{}};
    Rng rng(i + 1);
    const Decision d = plan_with_fallback(in.start, in.j, 1, ctx, rotor_ga(), rng, in.j);
    if (d.emergency) continue;
    RolloutEvaluator ev(in.map, fov, in.threats, in.peers, Weights{}, RepulsionParams{});
    const auto truth =
        oracle::enumerate([&](std::span<const std::int8_t> a) { return ev.evaluate(in.start, d.j, a).value; }, 1);
    const ActionSequence chosen{static_cast<std::int8_t>(d.u)};
    EXPECT_NEAR(ev.evaluate(in.start, d.j, chosen).value, truth.best, 1e-9) << "instance " << i;
  }
}

TEST(Decide, TurnsLeftTowardBlobAheadLeft) {
  // Heading +x; "left" lowers the ring number, toward -y.
  const TargetPrior blob{{260.0, 100.0}, 0.3, 40.0};
  Scene s(init_probability(kGrid, std::span(&blob, 1)));
  const GridPose pose{{50, 40}, 0.0, 0};  // centre (198, 158)
  int left = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const Decision d = plan_with_fallback(pose, 2, 6, s.ctx, rotor_ga(), rng);
    if (d.u == -1) ++left;
  }
  EXPECT_GE(left, 9);
}

TEST(Decide, AvoidsDeniedAreaStraightAhead) {
  Scene s(SearchMap(kGrid, 1));
  s.threats.denied.push_back({DeniedArea::Shape::kCircle, {230.0, 158.0}, 20.0, {}, {}});
  const GridPose pose{{50, 40}, 0.0, 0};
  for (int seed = 1; seed <= 5; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const Decision d = plan_with_fallback(pose, 4, 6, s.ctx, rotor_ga(), rng);
    EXPECT_FALSE(d.emergency);
    EXPECT_NE(d.u, 0);
  }
}

TEST(PlanWithFallback, OpenSpaceKeepsRequestedJ) {
  Scene s(SearchMap(kGrid, 1));
  Rng rng(1);
  const Decision d = plan_with_fallback({{50, 40}, 0.0, 0}, 4, 8, s.ctx, rotor_ga(), rng);
  EXPECT_EQ(d.j, 4);
  EXPECT_EQ(d.diag.j_used, 4);
  EXPECT_EQ(d.diag.j_requested, 4);
  EXPECT_FALSE(d.emergency);
}

TEST(PlanWithFallback, JOneStaysOne) {
  Scene s(SearchMap(kGrid, 1));
  Rng rng(1);
  const Decision d = plan_with_fallback({{50, 40}, 0.0, 0}, 1, 6, s.ctx, rotor_ga(), rng);
  EXPECT_EQ(d.j, 1);
  EXPECT_FALSE(d.emergency);
}

TEST(PlanWithFallback, ReducesJNearBoundary) {
  Scene s(SearchMap(kGrid, 1));
  // 10 cells from the right edge, heading straight at it.
  Rng rng(2);
  const Decision d = plan_with_fallback({{90, 40}, 0.0, 0}, 6, 6, s.ctx, rotor_ga(), rng);
  EXPECT_FALSE(d.emergency);
  EXPECT_LT(d.j, 6);
}

TEST(PlanWithFallback, EmergencyWhenNothingIsFeasible) {
  Scene s(SearchMap(kGrid, 1));
  const GridPose corner{{1, 1}, -135.0, heading_to_number(-135.0, 1)};
  Rng rng(1);
  const Decision d = plan_with_fallback(corner, 3, 4, s.ctx, rotor_ga(), rng);
  EXPECT_TRUE(d.emergency);
  EXPECT_EQ(d.j, 1);
  EXPECT_EQ(d.u, emergency_action(corner, s.threats));
}

TEST(EmergencyAction, PicksLargestClearance) {
  const ThreatModel tm{kGrid, {}};
  // Heading +y along the left edge: turning right (toward +x) gains clearance.
  const GridPose pose{{1, 40}, 90.0, heading_to_number(90.0, 1)};
  const int u = emergency_action(pose, tm);
  const GridPose next = step(with_jump(pose, 1), u, 1);
  EXPECT_EQ(next.cell.x, 2);
}

TEST(DecideProperty, FirstStepNeverViolatesUnlessEmergency) {
  for (int i = 0; i < 60; ++i) {
    oracle::Instance in = oracle::random_instance(3000 + static_cast<std::uint64_t>(i), 4 + i % 4);
    FootprintCache fov(in.grid, in.fov);
    PlanningContext ctx{&in.map, &fov, &in.threats, in.peers, Weights{}, RepulsionParams{}};
    Rng rng(static_cast<std::uint64_t>(i));
    const Decision d = plan_with_fallback(in.start, in.j, in.m, ctx, rotor_ga(), rng);
    if (!d.emergency) {
      EXPECT_FALSE(first_step_violates(d, in.start, in.threats)) << "instance " << i;
    }
  }
}

TEST(DecideProperty, SameSeedSameDecision) {
  const oracle::Instance in = oracle::random_instance(42, 8);
  FootprintCache fov(in.grid, in.fov);
  PlanningContext ctx{&in.map, &fov, &in.threats, in.peers, Weights{}, RepulsionParams{}};
  Rng a(9);
  Rng b(9);
  const Decision da = plan_with_fallback(in.start, in.j, in.m, ctx, rotor_ga(), a);
  const Decision db = plan_with_fallback(in.start, in.j, in.m, ctx, rotor_ga(), b);
  EXPECT_EQ(da.sequence, db.sequence);
  EXPECT_EQ(da.j, db.j);
  EXPECT_EQ(da.diag.best, db.diag.best);
}

TEST(RelayPlan, OpenSkyAcceptsAFeasibleAction) {
  const GridSpec big{4.0, 400, 200};
  const ThreatModel tm{big, {}};
  const std::vector<Vec2> cluster{{800.0, 400.0}};
  Rng rng(1);
  const GridPose pose{world_to_grid(big, {800.0, 400.0}), 0.0, 0};
  const Decision d = relay_plan(pose, 12, 10, tm, cluster, fixed_wing_ga(), rng, 6);
  EXPECT_FALSE(d.emergency);
  EXPECT_FALSE(first_step_violates(d, pose, tm));
}

TEST(RelayPlan, TurnsBackTowardCluster) {
  const GridSpec big{4.0, 400, 200};
  const ThreatModel tm{big, {}};
  const std::vector<Vec2> cluster{{1200.0, 400.0}};
  const GridPose pose{world_to_grid(big, {700.0, 400.0}), 180.0, heading_to_number(180.0, 6)};
  Rng rng(4);
  const Decision d = relay_plan(pose, 6, 15, tm, cluster, fixed_wing_ga(), rng, 6);
  ASSERT_FALSE(d.emergency);
  GridPose end = with_jump(pose, d.j);
  GridPose straight = end;
  for (std::int8_t u : d.sequence) {
    end = step(end, u, d.j);
    straight = step(straight, 0, d.j);
  }
  EXPECT_LT(distance(grid_to_world(big, end.cell), cluster[0]),
            distance(grid_to_world(big, straight.cell), cluster[0]));
}

TEST(RelayPlan, ReducesJApproachingBoundaryHeadOn) {
  const GridSpec big{4.0, 400, 200};
  const ThreatModel tm{big, {}};
  const std::vector<Vec2> cluster{{800.0, 400.0}};
  // 200 m from the right edge at 48 m per step: no 10-step sequence at j = 12
  // turns around in time.
  const GridPose pose{world_to_grid(big, {1400.0, 400.0}), 0.0, 0};
  Rng rng(5);
  const Decision d = relay_plan(pose, 12, 10, tm, cluster, fixed_wing_ga(), rng, 1);
  EXPECT_FALSE(d.emergency);
  EXPECT_LT(d.j, 12);
  EXPECT_FALSE(first_step_violates(d, pose, tm));
}
