#pragma once

#include <optional>

#include "coopsearch/grid_world.hpp"

namespace coopsearch {

// Kinematic envelope of one UAV type.
struct JumpParams {
  double dt = 1.0;     // decision interval, s
  double v_min = 0.0;  // m/s
  double v_max = 35.0;
  double a_max = 15.0;  // max lateral acceleration, m/s^2
};

struct JRange {
  int lo = 1;
  int hi = 0;

  bool empty() const { return hi < lo; }
  bool contains(int j) const { return j >= lo && j <= hi; }
  int clamp(int j) const { return j < lo ? lo : (j > hi ? hi : j); }
};

struct JRangeReport {
  JRange range;
  bool accel_feasible = false;  // grid coarse enough for a_max at n = 1
};

// UAV pose on the jump grid. `number` lies in (-4j, 4j] for the j it was
// derived with; `heading` is degrees in [-180, 180), measured from +x toward +y.
struct GridPose {
  Cell cell;
  double heading = 0.0;
  int number = 0;
};

double turning_radius(int j, double r);
// Heading change between ring neighbours n-1 and n, degrees. Throws
// std::domain_error unless 1 <= n <= j.
double turning_angle(int j, int n);
double acceleration_coeff(int j, int n);

// Implied flight speed for a move to ring number n.
double step_speed(int j, int n, double r, double dt);

// Integer j satisfying both the turning-radius bound (evaluated at the
// diagonal per-step speed) and the speed bounds.
JRangeReport feasible_j_range(const JumpParams& params, double r);

double normalize_heading(double deg);

// Ring number whose direction owns `heading` for jump value j. Intervals are
// half-open [n - 1/2, n + 1/2) in ring coordinates (the position along the
// Chebyshev ring of radius j), which makes this the exact inverse of the
// heading produced by step(); the rear direction is reported as +4j.
int heading_to_number(double heading, int j);

// (dx, dy) cell increment for ring number n; every result has max(|dx|,|dy|) == j.
Cell increment(int n, int j);

int wrap_number(int n, int j);

// Applies action u in {-1, 0, +1}. Does not check bounds.
GridPose step(const GridPose& pose, int u, int j);

// Re-derives the ring number for a (possibly different) jump value.
GridPose with_jump(const GridPose& pose, int j);

}  // namespace coopsearch
