#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "coopsearch/grid_world.hpp"
#include "coopsearch/jump_grid.hpp"
#include "coopsearch/objective.hpp"
#include "coopsearch/rng.hpp"

namespace coopsearch {

// Horizon-length vector over {-1 (left), 0 (straight), +1 (right)}. "Left"
// lowers the ring number, i.e. turns toward -y when heading along +x.
using ActionSequence = std::vector<std::int8_t>;

struct GaConfig {
  int population = 100;
  int max_generations = 50;  // populations evaluated, the initial one included
  double mutation_rate = 0.5;   // per gene
  double crossover_rate = 0.5;  // per parent pair
  double epsilon = 1e-3;        // relative improvement regarded as progress
  int patience = 10;            // stalled generations before stopping
  int elite = 2;

  // Throws ScenarioError when the invariants do not hold.
  void validate(const char* where) const;
};

struct GaResult {
  ActionSequence best;
  double best_fitness = 0.0;
  int generations = 0;
  std::size_t evaluations = 0;
  std::vector<double> best_per_generation;  // best ever, after each generation
  std::vector<double> population_best;      // best member of each generation's population
};

using Fitness = std::function<double(std::span<const std::int8_t>)>;

// Genetic search over action sequences: uniform random initial population,
// binary tournaments, single-point crossover, per-gene resampling mutation
// and elitism. Fitness values are memoised per genome.
GaResult ga_optimize(const Fitness& fitness, int m, const GaConfig& config, Rng& rng);

struct DecisionDiagnostics {
  int j_used = 0;
  int j_requested = 0;
  int m = 0;
  int generations = 0;  // summed over every ladder rung tried
  std::size_t evaluations = 0;
  double best = 0.0;  // objective value of the chosen sequence
  double min = 0.0;   // over feasible sequences evaluated at j_used
  double max = 0.0;
  RevenueTerms best_terms;
  double wall_ms = 0.0;
};

struct Decision {
  int u = 0;
  int j = 1;
  bool emergency = false;
  ActionSequence sequence;
  DecisionDiagnostics diag;
};

// Everything a rotor needs to score its options; the map and footprint cache
// belong to the deciding UAV.
struct PlanningContext {
  const SearchMap* map = nullptr;
  FootprintCache* fov = nullptr;
  const ThreatModel* threats = nullptr;
  std::vector<Vec2> peers;
  Weights weights;
  RepulsionParams repulsion;
};

// Receding-horizon GA with the maneuverability ladder: optimise at j, and
// while no feasible sequence exists retry at j - 1 down to j_floor. If even
// j_floor fails the emergency action is returned.
Decision plan_with_fallback(const GridPose& pose, int j, int m, const PlanningContext& ctx, const GaConfig& ga, Rng& rng,
                            int j_floor = 1);

// Per-UAV decision entry point.
inline Decision decide(const GridPose& pose, int j, int m, const PlanningContext& ctx, const GaConfig& ga, Rng& rng) {
  return plan_with_fallback(pose, j, m, ctx, ga, rng);
}

// Action whose one-step successor at j = 1 is farthest from every threat.
int emergency_action(const GridPose& pose, const ThreatModel& threats);

// Fixed-wing relay: any feasible sequence is acceptable, with a bonus that
// grows as the predicted end point approaches the centroid of `cluster`.
Decision relay_plan(const GridPose& pose, int j, int m, const ThreatModel& threats, std::span<const Vec2> cluster,
                    const GaConfig& ga, Rng& rng, int j_floor = 1);

}  // namespace coopsearch
