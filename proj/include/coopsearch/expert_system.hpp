#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "coopsearch/grid_world.hpp"
#include "coopsearch/jump_grid.hpp"

namespace coopsearch {

struct ExpertInputs {
  double b = std::numeric_limits<double>::infinity();  // closest target distance, m
  double b_star = 160.0;                               // warning distance, m
  int found = 0;
  int total = 0;
};

struct ExpertOutput {
  int j = 1;
  int m = 8;
  double kw1 = 1.0;
  double kw2 = 1.0;
  double kw3 = 1.0;
  double e1 = 0.0;
  double e2 = 0.0;
};

// Row covering [lo, hi) of the expert input.
struct DistanceRow {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  int j = 1;
  double kw3 = 1.0;
};

struct DiscoveryRow {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double kw1 = 1.0;
  double kw2 = 1.0;
  int m = 8;
};

struct ExpertTables {
  std::vector<DistanceRow> distance;    // system 1: E1 = b / b*
  std::vector<DiscoveryRow> discovery;  // system 2: E2 = found / total

  // Reference tables for rotors.
  static ExpertTables rotor_default();
  // Fixed-wing: system-1 jump values doubled, horizons 10/12/15.
  static ExpertTables fixed_wing_default();

  // Rows must be contiguous from 0 to +inf with no gaps or overlaps.
  // Throws ScenarioError naming the first offending row.
  void validate(const std::string& where) const;
};

// Looks up both systems; j is clamped into `feasible`. With no targets
// configured, E2 is taken as 1.
ExpertOutput eval_expert(const ExpertInputs& in, const ExpertTables& tables, JRange feasible);

struct TargetReference {
  Vec2 prior;
  Vec2 confirmed;
  bool is_confirmed = false;
};

// Distance to the nearest target: confirmed position where known, prior
// otherwise. +inf with no targets.
double closest_target_distance(Vec2 uav, std::span<const TargetReference> targets);

}  // namespace coopsearch
