#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coopsearch/grid_world.hpp"
#include "coopsearch/jump_grid.hpp"

namespace coopsearch {

// Base weights and the expert-system correction coefficients; the weight
// actually applied to term i is kw_i * w_i.
struct Weights {
  double w1 = 10.0;
  double w2 = 1.0;
  double w3 = 5.0;
  double kw1 = 1.0;
  double kw2 = 1.0;
  double kw3 = 1.0;

  double e1() const { return kw1 * w1; }
  double e2() const { return kw2 * w2; }
  double e3() const { return kw3 * w3; }
};

struct RepulsionParams {
  double k = 10.0;
  double mu = 6e-3;   // 1/m
  double d_max = 200.0;  // m
};

struct RevenueTerms {
  double jp = 0.0;
  double je = 0.0;
  double jc = 0.0;
};

inline double weighted(const RevenueTerms& t, const Weights& w) { return w.e1() * t.jp + w.e2() * t.je + w.e3() * t.jc; }

// Sum of p over covered cells not yet latched as found.
double target_benefit(const SearchMap& map, std::span<const std::size_t> cells);
double uncertainty_benefit(const SearchMap& map, std::span<const std::size_t> cells);

// 1 - |sum of repulsive forces|. A peer at exactly the UAV's position pushes
// along `coincident_dir` (a unit vector the caller draws once per decision).
double collision_benefit(Vec2 self, std::span<const Vec2> peers, const RepulsionParams& params,
                         Vec2 coincident_dir = {1.0, 0.0});

// Threat geometry a UAV currently knows about: the area boundary plus the
// denied areas it has perceived.
struct ThreatModel {
  GridSpec grid;
  std::vector<DeniedArea> denied;

  // True when the straight move from `from` to `to` leaves the area or
  // touches a denied area (sampled every half cell along the segment).
  bool violates(Cell from, Cell to) const;
  // Distance from a position to the nearest threat boundary; negative when
  // already inside a denied area or outside the area.
  double clearance(Vec2 pos) const;
};

double state_revenue(const SearchMap& map, FootprintCache& fov, const GridPose& pose, std::span<const Vec2> peers,
                     const Weights& weights, const RepulsionParams& repulsion);

struct SequenceRevenue {
  double value = 0.0;  // sum of state revenues, or -(1 + violations) when infeasible
  int violations = 0;
  RevenueTerms terms;  // unweighted sums over the horizon

  bool feasible() const { return violations == 0; }
};

// Rolls an action sequence forward and scores it. Within one rollout every
// predicted footprint halves chi and masks p on a private overlay, so the
// horizon does not reward covering the same cells twice.
class RolloutEvaluator {
 public:
  RolloutEvaluator(const SearchMap& map, FootprintCache& fov, const ThreatModel& threats, std::vector<Vec2> peers,
                   const Weights& weights, const RepulsionParams& repulsion, Vec2 coincident_dir = {1.0, 0.0},
                   bool in_horizon_decay = true);

  SequenceRevenue evaluate(const GridPose& start, int j, std::span<const std::int8_t> actions);

  // Lower bound of any feasible sequence value over m steps.
  double feasible_floor(int m) const;

 private:
  const SearchMap& map_;
  FootprintCache& fov_;
  const ThreatModel& threats_;
  std::vector<Vec2> peers_;
  Weights weights_;
  RepulsionParams repulsion_;
  Vec2 coincident_dir_;
  bool decay_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint8_t> visits_;
  std::uint32_t current_ = 0;
};

SequenceRevenue sequence_revenue(const SearchMap& map, FootprintCache& fov, const ThreatModel& threats,
                                 const GridPose& start, int j, std::span<const std::int8_t> actions,
                                 std::span<const Vec2> peers, const Weights& weights,
                                 const RepulsionParams& repulsion);

}  // namespace coopsearch
