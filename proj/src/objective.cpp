#include "coopsearch/objective.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace coopsearch {

namespace {

constexpr unsigned kMaxVisits = 255;

// 2^-n for n in [0, kMaxVisits]; exact, so chi * kHalvings[n] == ldexp(chi, -n).
const std::array<double, kMaxVisits + 1> kHalvings = [] {
  std::array<double, kMaxVisits + 1> h{};
  for (unsigned n = 0; n <= kMaxVisits; ++n) h[n] = std::ldexp(1.0, -static_cast<int>(n));
  return h;
}();

}  // namespace

double target_benefit(const SearchMap& map, std::span<const std::size_t> cells) {
  double s = 0.0;
  for (std::size_t idx : cells) {
    if (!map.found(idx)) s += map.p(idx);
  }
  return s;
}

double uncertainty_benefit(const SearchMap& map, std::span<const std::size_t> cells) {
  double s = 0.0;
  for (std::size_t idx : cells) s += map.chi(idx);
  return s;
}

double collision_benefit(Vec2 self, std::span<const Vec2> peers, const RepulsionParams& params, Vec2 coincident_dir) {
  Vec2 force;
  for (Vec2 peer : peers) {
    const Vec2 d = self - peer;
    const double dist = d.norm();
    if (dist > params.d_max) continue;
    const Vec2 unit = dist > 0.0 ? d * (1.0 / dist) : coincident_dir;
    force += unit * (params.k * std::exp(-params.mu * dist));
  }
  return 1.0 - force.norm();
}

bool ThreatModel::violates(Cell from, Cell to) const {
  if (!grid.contains(to)) return true;
  if (denied.empty()) return false;
  const Vec2 a = grid_to_world(grid, grid.contains(from) ? from : to);
  const Vec2 b = grid_to_world(grid, to);
  const double len = distance(a, b);
  const Vec2 mid = (a + b) * 0.5;
  bool near = false;
  for (const auto& area : denied) {
    if (area.signed_distance(mid) <= 0.5 * len + 1e-9) {
      near = true;
      break;
    }
  }
  if (!near) return false;
  const int samples = std::max(1, static_cast<int>(std::ceil(len / (0.5 * grid.r))));
  for (int s = 0; s <= samples; ++s) {
    const Vec2 p = a + (b - a) * (static_cast<double>(s) / samples);
    for (const auto& area : denied) {
      if (area.contains(p)) return true;
    }
  }
  return false;
}

double ThreatModel::clearance(Vec2 pos) const {
  double c = std::min({pos.x, grid.width() - pos.x, pos.y, grid.height() - pos.y});
  for (const auto& area : denied) c = std::min(c, area.signed_distance(pos));
  return c;
}

double state_revenue(const SearchMap& map, FootprintCache& fov, const GridPose& pose, std::span<const Vec2> peers,
                     const Weights& weights, const RepulsionParams& repulsion) {
  std::vector<std::size_t> cells;
  fov.cells(pose.cell, static_cast<float>(pose.heading), cells);
  RevenueTerms t;
  t.jp = target_benefit(map, cells);
  t.je = uncertainty_benefit(map, cells);
  t.jc = collision_benefit(grid_to_world(map.grid(), pose.cell), peers, repulsion);
  return weighted(t, weights);
}

RolloutEvaluator::RolloutEvaluator(const SearchMap& map, FootprintCache& fov, const ThreatModel& threats,
                                   std::vector<Vec2> peers, const Weights& weights, const RepulsionParams& repulsion,
                                   Vec2 coincident_dir, bool in_horizon_decay)
    : map_(map),
      fov_(fov),
      threats_(threats),
      peers_(std::move(peers)),
      weights_(weights),
      repulsion_(repulsion),
      coincident_dir_(coincident_dir),
      decay_(in_horizon_decay) {
  if (decay_) {
    stamp_.assign(map.grid().size(), 0);
    visits_.assign(map.grid().size(), 0);
  }
}

double RolloutEvaluator::feasible_floor(int m) const {
  const double worst_jc = 1.0 - repulsion_.k * static_cast<double>(peers_.size());
  return m * std::min(0.0, weights_.e3() * worst_jc);
}

SequenceRevenue RolloutEvaluator::evaluate(const GridPose& start, int j, std::span<const std::int8_t> actions) {
  SequenceRevenue out;
  if (decay_ && ++current_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    current_ = 1;
  }
  const GridSpec& grid = map_.grid();
  GridPose pose = with_jump(start, j);
  double total = 0.0;
  for (std::int8_t u : actions) {
    const GridPose next = step(pose, u, j);
    if (threats_.violates(pose.cell, next.cell)) {
      ++out.violations;
      pose = next;
      continue;
    }
    pose = next;
    RevenueTerms t;
    const double* p = map_.p_layer().data();
    const double* chi = map_.chi_layer().data();
    const std::uint8_t* found = map_.found_layer().data();
    if (decay_) {
      fov_.for_each_index(pose.cell, static_cast<float>(pose.heading), [&](std::size_t idx) {
        unsigned seen = 0;
        if (stamp_[idx] == current_) {
          seen = visits_[idx];
        } else {
          stamp_[idx] = current_;
          visits_[idx] = 0;
        }
        if (visits_[idx] < kMaxVisits) ++visits_[idx];
        if (seen == 0 && !found[idx]) t.jp += p[idx];
        t.je += chi[idx] * kHalvings[seen];
      });
    } else {
      fov_.for_each_index(pose.cell, static_cast<float>(pose.heading), [&](std::size_t idx) {
        if (!found[idx]) t.jp += p[idx];
        t.je += chi[idx];
      });
    }
    t.jc = collision_benefit(grid_to_world(grid, pose.cell), peers_, repulsion_, coincident_dir_);
    out.terms.jp += t.jp;
    out.terms.je += t.je;
    out.terms.jc += t.jc;
    total += weighted(t, weights_);
  }
  out.value = out.violations > 0 ? -(1.0 + out.violations) : total;
  return out;
}

SequenceRevenue sequence_revenue(const SearchMap& map, FootprintCache& fov, const ThreatModel& threats,
                                 const GridPose& start, int j, std::span<const std::int8_t> actions,
                                 std::span<const Vec2> peers, const Weights& weights,
                                 const RepulsionParams& repulsion) {
  RolloutEvaluator ev(map, fov, threats, std::vector<Vec2>(peers.begin(), peers.end()), weights, repulsion);
  return ev.evaluate(start, j, actions);
}

}  // namespace coopsearch
