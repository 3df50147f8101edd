#include "coopsearch/jump_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coopsearch {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

double rad(double deg) { return deg / kDeg; }

}  // namespace

double turning_radius(int j, double r) { return (0.5 * (j + 1) * (j + 1) + static_cast<double>(j) * (j - 1)) * r; }

double turning_angle(int j, int n) {
  if (j < 1 || n < 1 || n > j) throw std::domain_error("turning_angle requires 1 <= n <= j");
  return (std::atan(static_cast<double>(n) / j) - std::atan(static_cast<double>(n - 1) / j)) * kDeg;
}

double acceleration_coeff(int j, int n) {
  if (j < 1 || n < 1 || n > j) throw std::domain_error("acceleration_coeff requires 1 <= n <= j");
  const double dphi = std::atan(static_cast<double>(n) / j) - std::atan(static_cast<double>(n - 1) / j);
  return std::sqrt(static_cast<double>(j) * j + static_cast<double>(n) * n) * dphi;
}

double step_speed(int j, int n, double r, double dt) {
  const Cell d = increment(n, j);
  return r * std::hypot(d.x, d.y) / dt;
}

JRangeReport feasible_j_range(const JumpParams& params, double r) {
  JRangeReport rep;
  rep.accel_feasible = std::numbers::sqrt2 * std::numbers::pi / 4.0 * r / (params.dt * params.dt) < params.a_max;
  const double lo_bound = params.v_min * params.dt / r;
  const double hi_bound = std::numbers::sqrt2 * params.v_max * params.dt / (2.0 * r);
  JRange range{1, 0};
  bool any = false;
  for (int j = 1; j < hi_bound; ++j) {
    if (!(j > lo_bound)) continue;
    const double v = step_speed(j, j, r, params.dt);
    const double r_min = v * v / params.a_max;
    if (!(r_min / r < turning_radius(j, 1.0))) continue;
    if (!any) range.lo = j;
    range.hi = j;
    any = true;
  }
  rep.range = any ? range : JRange{1, 0};
  return rep;
}

double normalize_heading(double deg) {
  double h = std::fmod(deg + 180.0, 360.0);
  if (h < 0.0) h += 360.0;
  h -= 180.0;
  return h >= 180.0 ? -180.0 : h;
}

int wrap_number(int n, int j) {
  const int span = 8 * j;
  while (n > 4 * j) n -= span;
  while (n <= -4 * j) n += span;
  return n;
}

int heading_to_number(double heading, int j) {
  const double h = normalize_heading(heading);
  const double jd = j;
  double s;
  if (h >= -45.0 && h <= 45.0) {
    s = jd * std::tan(rad(h));
  } else if (h > 45.0 && h < 135.0) {
    s = 2.0 * jd - jd / std::tan(rad(h));
  } else if (h >= 135.0) {
    s = 4.0 * jd + jd * std::tan(rad(h));
  } else if (h < -45.0 && h > -135.0) {
    s = -2.0 * jd - jd / std::tan(rad(h));
  } else {
    s = jd * std::tan(rad(h)) - 4.0 * jd;
  }
  return wrap_number(static_cast<int>(std::floor(s + 0.5)), j);
}

Cell increment(int n, int j) {
  n = wrap_number(n, j);
  if (n < -3 * j) return {-j, -n - 4 * j};
  if (n < -j) return {2 * j + n, -j};
  if (n < j) return {j, n};
  if (n < 3 * j) return {2 * j - n, j};
  return {-j, -n + 4 * j};
}

GridPose step(const GridPose& pose, int u, int j) {
  GridPose next;
  next.number = wrap_number(pose.number + u, j);
  const Cell d = increment(next.number, j);
  next.cell = pose.cell + d;
  next.heading = normalize_heading(std::atan2(static_cast<double>(d.y), static_cast<double>(d.x)) * kDeg);
  return next;
}

GridPose with_jump(const GridPose& pose, int j) {
  GridPose out = pose;
  out.number = heading_to_number(pose.heading, j);
  return out;
}

}  // namespace coopsearch
