#include "coopsearch/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

#include "coopsearch/errors.hpp"

namespace coopsearch {

void GaConfig::validate(const char* where) const {
  const std::string w = where;
  if (population < 2) throw ScenarioError(w + "/population", "population must be at least 2");
  if (max_generations < 1) throw ScenarioError(w + "/max_generations", "need at least one generation");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw ScenarioError(w + "/mutation_rate", "must be in [0,1]");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ScenarioError(w + "/crossover_rate", "must be in [0,1]");
  if (elite < 1 || elite > population) throw ScenarioError(w + "/elite", "elite count must be in [1, population]");
  if (!(epsilon >= 0.0)) throw ScenarioError(w + "/epsilon", "must be non-negative");
  if (patience < 1) throw ScenarioError(w + "/patience", "must be at least 1");
}

namespace {

std::uint64_t genome_key(std::span<const std::int8_t> g) {
  std::uint64_t k = 1;
  for (std::int8_t a : g) k = k * 3 + static_cast<std::uint64_t>(a + 1);
  return k;
}

std::int8_t random_gene(Rng& rng) { return static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1); }

}  // namespace

GaResult ga_optimize(const Fitness& fitness, int m, const GaConfig& config, Rng& rng) {
  const auto pop_size = static_cast<std::size_t>(config.population);
  std::unordered_map<std::uint64_t, double> memo;
  GaResult res;

  auto eval = [&](const ActionSequence& g) {
    const std::uint64_t key = genome_key(g);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const double f = fitness(g);
    memo.emplace(key, f);
    ++res.evaluations;
    return f;
  };

  std::vector<ActionSequence> pop(pop_size, ActionSequence(static_cast<std::size_t>(m)));
  std::vector<double> fit(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    for (auto& gene : pop[i]) gene = random_gene(rng);
    fit[i] = eval(pop[i]);
  }

  std::vector<std::size_t> order(pop_size);
  auto rank = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
  };
  rank();
  res.best = pop[order[0]];
  res.best_fitness = fit[order[0]];
  res.best_per_generation.push_back(res.best_fitness);
  res.population_best.push_back(fit[order[0]]);
  res.generations = 1;

  auto tournament = [&]() -> const ActionSequence& {
    const std::size_t a = rng.below(pop_size);
    const std::size_t b = rng.below(pop_size);
    return fit[b] > fit[a] ? pop[b] : pop[a];
  };

  int stalled = 0;
  const auto elite = static_cast<std::size_t>(config.elite);
  while (res.generations < config.max_generations) {
    std::vector<ActionSequence> next;
    next.reserve(pop_size);
    for (std::size_t e = 0; e < elite && e < pop_size; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop_size) {
      ActionSequence c1 = tournament();
      ActionSequence c2 = tournament();
      if (m > 1 && rng.bernoulli(config.crossover_rate)) {
        const auto cut = static_cast<std::size_t>(rng.uniform_int(1, m - 1));
        std::swap_ranges(c1.begin() + static_cast<std::ptrdiff_t>(cut), c1.end(),
                         c2.begin() + static_cast<std::ptrdiff_t>(cut));
      }
      for (auto* child : {&c1, &c2}) {
        for (auto& gene : *child) {
          if (rng.bernoulli(config.mutation_rate)) gene = random_gene(rng);
        }
      }
      next.push_back(std::move(c1));
      if (next.size() < pop_size) next.push_back(std::move(c2));
    }
    pop = std::move(next);
    for (std::size_t i = 0; i < pop_size; ++i) fit[i] = eval(pop[i]);
    rank();
    ++res.generations;
    res.population_best.push_back(fit[order[0]]);

    const double prev = res.best_fitness;
    if (fit[order[0]] > res.best_fitness) {
      res.best_fitness = fit[order[0]];
      res.best = pop[order[0]];
    }
    res.best_per_generation.push_back(res.best_fitness);
    const double gain = res.best_fitness - prev;
    if (gain < config.epsilon * std::max(1.0, std::abs(prev))) {
      if (++stalled >= config.patience) break;
    } else {
      stalled = 0;
    }
  }
  return res;
}

int emergency_action(const GridPose& pose, const ThreatModel& threats) {
  const GridPose p1 = with_jump(pose, 1);
  int best_u = 0;
  double best_c = -std::numeric_limits<double>::infinity();
  for (int u : {0, -1, 1}) {
    const GridPose next = step(p1, u, 1);
    const Vec2 pos{threats.grid.r * (next.cell.x - 0.5), threats.grid.r * (next.cell.y - 0.5)};
    const double c = threats.clearance(pos);
    if (c > best_c) {
      best_c = c;
      best_u = u;
    }
  }
  return best_u;
}

namespace {

using Clock = std::chrono::steady_clock;

// Runs the ladder given a per-j scoring function. `score` returns the
// sequence result for (j, actions); feasible results are shifted by the
// caller-provided offset so that feasible <=> fitness > 0.
template <typename Score>
Decision ladder(const GridPose& pose, int j, int j_floor, int m, const GaConfig& ga, Rng& rng, const ThreatModel& threats,
                Score&& score) {
  const auto start = Clock::now();
  Decision d;
  d.diag.j_requested = j;
  d.diag.m = m;
  j_floor = std::max(1, std::min(j_floor, j));
  for (int jj = j; jj >= j_floor; --jj) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    Fitness f = [&](std::span<const std::int8_t> actions) {
      const auto [fit, objective, feasible] = score(jj, actions);
      if (feasible) {
        lo = std::min(lo, objective);
        hi = std::max(hi, objective);
      }
      return fit;
    };
    const GaResult res = ga_optimize(f, m, ga, rng);
    d.diag.generations += res.generations;
    d.diag.evaluations += res.evaluations;
    if (res.best_fitness > 0.0) {
      const auto [fit, objective, feasible] = score(jj, res.best);
      d.u = res.best.front();
      d.j = jj;
      d.sequence = res.best;
      d.diag.j_used = jj;
      d.diag.best = objective;
      d.diag.min = lo;
      d.diag.max = hi;
      d.diag.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      return d;
    }
  }
  d.emergency = true;
  d.j = 1;
  d.u = emergency_action(pose, threats);
  d.sequence = {static_cast<std::int8_t>(d.u)};
  d.diag.j_used = 1;
  d.diag.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return d;
}

struct Scored {
  double fitness;
  double objective;
  bool feasible;
};

}  // namespace

Decision plan_with_fallback(const GridPose& pose, int j, int m, const PlanningContext& ctx, const GaConfig& ga, Rng& rng,
                            int j_floor) {
  const double theta = rng.uniform01() * 2.0 * std::numbers::pi;
  const Vec2 dir{std::cos(theta), std::sin(theta)};
  RolloutEvaluator ev(*ctx.map, *ctx.fov, *ctx.threats, ctx.peers, ctx.weights, ctx.repulsion, dir);
  const double shift = 1.0 - ev.feasible_floor(m);
  RevenueTerms best_terms;
  auto score = [&](int jj, std::span<const std::int8_t> actions) {
    const SequenceRevenue r = ev.evaluate(pose, jj, actions);
    best_terms = r.terms;
    return Scored{r.feasible() ? r.value + shift : r.value, r.value, r.feasible()};
  };
  Decision d = ladder(pose, j, j_floor, m, ga, rng, *ctx.threats, score);
  if (!d.emergency) d.diag.best_terms = best_terms;
  return d;
}

Decision relay_plan(const GridPose& pose, int j, int m, const ThreatModel& threats, std::span<const Vec2> cluster,
                    const GaConfig& ga, Rng& rng, int j_floor) {
  Vec2 centroid{threats.grid.width() / 2.0, threats.grid.height() / 2.0};
  if (!cluster.empty()) {
    centroid = {};
    for (Vec2 c : cluster) centroid += c;
    centroid = centroid * (1.0 / static_cast<double>(cluster.size()));
  }
  auto score = [&](int jj, std::span<const std::int8_t> actions) {
    GridPose p = with_jump(pose, jj);
    int violations = 0;
    for (std::int8_t u : actions) {
      const GridPose next = step(p, u, jj);
      if (threats.violates(p.cell, next.cell)) ++violations;
      p = next;
    }
    if (violations > 0) return Scored{-(1.0 + violations), -(1.0 + violations), false};
    const double d = distance(grid_to_world(threats.grid, p.cell), centroid);
    const double bonus = 1.0 / (1.0 + d / 100.0);
    return Scored{bonus, bonus, true};
  };
  return ladder(pose, j, j_floor, m, ga, rng, threats, score);
}

}  // namespace coopsearch
