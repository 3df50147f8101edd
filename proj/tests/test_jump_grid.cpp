#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "coopsearch/jump_grid.hpp"

using namespace coopsearch;

namespace {

constexpr double kRel = 1e-9;
const double kCornerCoeff = std::sqrt(2.0) * std::numbers::pi / 4.0;

void expect_rel(double actual, double expected) {
  EXPECT_NEAR(actual, expected, kRel * std::max(1.0, std::abs(expected))) << "expected " << expected;
}

JumpParams rotor() { return {1.0, 0.0, 35.0, 15.0}; }
JumpParams fixed_wing() { return {1.0, 20.0, 70.0, 10.0}; }

}  // namespace

TEST(TurningRadius, SmallJumps) {
  expect_rel(turning_radius(1, 4.0), 8.0);
  expect_rel(turning_radius(2, 4.0), 26.0);
  expect_rel(turning_radius(3, 4.0), 56.0);
}

TEST(TurningAngle, Values) {
  expect_rel(turning_angle(1, 1), 45.0);
  expect_rel(turning_angle(2, 1), 26.56505117707799);
  expect_rel(turning_angle(2, 2), 18.43494882292201);
}

TEST(TurningAngle, DomainErrors) {
  EXPECT_THROW(turning_angle(2, 0), std::domain_error);
  EXPECT_THROW(turning_angle(2, 3), std::domain_error);
  EXPECT_THROW(acceleration_coeff(3, 4), std::domain_error);
}

TEST(AccelerationCoeff, Values) {
  expect_rel(acceleration_coeff(1, 1), kCornerCoeff);
  expect_rel(acceleration_coeff(1, 1), 1.1107207345395915);
  expect_rel(acceleration_coeff(2, 1), 1.036747571331046);
}

TEST(AccelerationCoeffProperty, MaximumAtFirstNumber) {
  for (int j = 1; j <= 10; ++j) {
    const double first = acceleration_coeff(j, 1);
    for (int n = 2; n <= j; ++n) EXPECT_LT(acceleration_coeff(j, n), first) << "j=" << j << " n=" << n;
  }
}

TEST(AccelerationCoeffProperty, NeverAboveCornerValue) {
  for (int j = 1; j <= 20; ++j) {
    for (int n = 1; n <= j; ++n) EXPECT_LE(acceleration_coeff(j, n), kCornerCoeff + 1e-15);
  }
}

TEST(TurningAngleProperty, QuarterOctantClosure) {
  for (int j = 1; j <= 10; ++j) {
    double sum = 0.0;
    for (int n = 1; n <= j; ++n) sum += turning_angle(j, n);
    EXPECT_NEAR(sum, 45.0, 1e-12) << "j=" << j;
  }
}

TEST(FeasibleJRange, Rotor) {
  const auto rep = feasible_j_range(rotor(), 4.0);
  EXPECT_TRUE(rep.accel_feasible);
  EXPECT_EQ(rep.range.lo, 1);
  EXPECT_EQ(rep.range.hi, 6);
}

TEST(FeasibleJRange, FixedWing) {
  const auto rep = feasible_j_range(fixed_wing(), 4.0);
  EXPECT_TRUE(rep.accel_feasible);
  EXPECT_EQ(rep.range.lo, 6);
  EXPECT_EQ(rep.range.hi, 12);
  EXPECT_TRUE(rep.range.contains(12));
}

TEST(FeasibleJRange, ZeroTopSpeedIsEmpty) {
  JumpParams p = rotor();
  p.v_max = 0.0;
  EXPECT_TRUE(feasible_j_range(p, 4.0).range.empty());
}

TEST(FeasibleJRange, CoarseGridFailsAccelerationCheck) {
  JumpParams p = rotor();
  p.a_max = 1.0;
  EXPECT_FALSE(feasible_j_range(p, 4.0).accel_feasible);
}

TEST(FeasibleJRangeProperty, EveryAdmissibleJMeetsBothBounds) {
  for (const JumpParams p : {rotor(), fixed_wing()}) {
    const auto rep = feasible_j_range(p, 4.0);
    for (int j = rep.range.lo; j <= rep.range.hi; ++j) {
      EXPECT_GT(j, p.v_min * p.dt / 4.0);
      EXPECT_LT(j, std::sqrt(2.0) * p.v_max * p.dt / 8.0);
      const double v = step_speed(j, j, 4.0, p.dt);
      EXPECT_GT(turning_radius(j, 4.0), v * v / p.a_max);
    }
  }
}

TEST(HeadingToNumber, Examples) {
  EXPECT_EQ(heading_to_number(0.0, 2), 0);
  EXPECT_EQ(heading_to_number(30.0, 2), 1);
  EXPECT_EQ(heading_to_number(std::nextafter(180.0, 0.0), 2), 8);
  EXPECT_EQ(heading_to_number(-180.0, 2), 8);
}

TEST(Increment, Examples) {
  EXPECT_EQ(increment(0, 2), (Cell{2, 0}));
  EXPECT_EQ(increment(3, 2), (Cell{1, 2}));
  EXPECT_EQ(increment(-8, 2), (Cell{-2, 0}));
  EXPECT_EQ(increment(8, 2), (Cell{-2, 0}));
}

TEST(IncrementProperty, EveryJumpLandsOnTheRing) {
  for (int j = 1; j <= 10; ++j) {
    for (int n = -4 * j + 1; n <= 4 * j; ++n) {
      const Cell d = increment(n, j);
      EXPECT_EQ(std::max(std::abs(d.x), std::abs(d.y)), j) << "j=" << j << " n=" << n;
    }
  }
}

TEST(IncrementProperty, NumbersAreDistinctAroundTheRing) {
  for (int j = 1; j <= 10; ++j) {
    std::vector<Cell> seen;
    for (int n = -4 * j + 1; n <= 4 * j; ++n) seen.push_back(increment(n, j));
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
    EXPECT_EQ(seen.size(), static_cast<std::size_t>(8 * j));
  }
}

TEST(StepProperty, MirrorAcrossXAxis) {
  for (int j = 1; j <= 10; ++j) {
    for (int n = -4 * j + 1; n < 4 * j; ++n) {
      for (int u = -1; u <= 1; ++u) {
        const GridPose a = step({{100, 100}, 0.0, n}, u, j);
        const GridPose b = step({{100, 100}, 0.0, -n}, -u, j);
        const Cell da{a.cell.x - 100, a.cell.y - 100};
        const Cell db{b.cell.x - 100, b.cell.y - 100};
        EXPECT_EQ(da.x, db.x);
        EXPECT_EQ(da.y, -db.y);
      }
    }
  }
}

TEST(StepProperty, HeadingAndNumberNeverDesynchronise) {
  for (int j = 1; j <= 10; ++j) {
    for (int n = -4 * j + 1; n <= 4 * j; ++n) {
      for (int u = -1; u <= 1; ++u) {
        const GridPose next = step({{500, 500}, 0.0, n}, u, j);
        EXPECT_EQ(next.number, wrap_number(n + u, j));
        EXPECT_EQ(heading_to_number(next.heading, j), next.number) << "j=" << j << " n=" << n << " u=" << u;
        EXPECT_GE(next.heading, -180.0);
        EXPECT_LT(next.heading, 180.0);
      }
    }
  }
}

TEST(StepProperty, HeadingRoundTripForEveryNumber) {
  for (int j = 1; j <= 10; ++j) {
    for (int n = -4 * j + 1; n <= 4 * j; ++n) {
      const Cell d = increment(n, j);
      const double heading = std::atan2(d.y, d.x) * 180.0 / std::numbers::pi;
      EXPECT_EQ(heading_to_number(normalize_heading(heading), j), n);
    }
  }
}

TEST(StepProperty, StepSpeedMatchesIncrementLength) {
  for (int j = 1; j <= 6; ++j) {
    for (int n = -4 * j + 1; n <= 4 * j; ++n) {
      const GridPose next = step({{50, 50}, 0.0, n - 1}, 1, j);
      const double len = 4.0 * std::hypot(next.cell.x - 50, next.cell.y - 50);
      if (n >= 0 && n <= j) expect_rel(step_speed(j, n, 4.0, 1.0), len);
    }
  }
}

TEST(WithJump, ReDerivesNumberFromHeading) {
  const GridPose p = step({{50, 50}, 0.0, 0}, 1, 2);  // heading atan(1/2)
  const GridPose q = with_jump(p, 4);
  EXPECT_EQ(q.number, 2);
  EXPECT_EQ(increment(q.number, 4), (Cell{4, 2}));
}

// Turning continuously one way traces a closed loop; half the number of cells
// it spans, times r, reproduces the turning-radius estimate.
TEST(TurningRadiusOracle, ClosedLoopExtent) {
  for (int j = 1; j <= 3; ++j) {
    GridPose pose{{200, 200}, 0.0, 0};
    int min_x = 200, max_x = 200, min_y = 200, max_y = 200;
    for (int k = 0; k < 8 * j; ++k) {
      pose = step(pose, -1, j);
      min_x = std::min(min_x, pose.cell.x);
      max_x = std::max(max_x, pose.cell.x);
      min_y = std::min(min_y, pose.cell.y);
      max_y = std::max(max_y, pose.cell.y);
    }
    EXPECT_EQ(pose.cell, (Cell{200, 200})) << "loop does not close for j=" << j;
    const double rx = 4.0 * (max_x - min_x + 1) / 2.0;
    const double ry = 4.0 * (max_y - min_y + 1) / 2.0;
    const double r_eq = turning_radius(j, 4.0);
    EXPECT_LE(std::abs(rx - r_eq), 0.15 * r_eq);
    EXPECT_LE(std::abs(ry - r_eq), 0.15 * r_eq);
  }
}

TEST(JRange, ClampAndContains) {
  const JRange r{2, 5};
  EXPECT_EQ(r.clamp(1), 2);
  EXPECT_EQ(r.clamp(9), 5);
  EXPECT_EQ(r.clamp(3), 3);
  EXPECT_TRUE(r.contains(5));
  EXPECT_FALSE(r.contains(6));
  EXPECT_TRUE((JRange{3, 2}).empty());
}
