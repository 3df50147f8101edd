#include "coopsearch/expert_system.hpp"

#include <cmath>

#include "coopsearch/errors.hpp"

namespace coopsearch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename Row>
void check_rows(const std::vector<Row>& rows, const std::string& where) {
  if (rows.empty()) throw ScenarioError(where, "table has no rows");
  double expect = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string w = where + "/" + std::to_string(i);
    if (rows[i].lo != expect) {
      throw ScenarioError(w, rows[i].lo > expect ? "gap in coverage before this row" : "row overlaps previous row");
    }
    if (!(rows[i].hi > rows[i].lo)) throw ScenarioError(w, "row upper bound must exceed lower bound");
    expect = rows[i].hi;
  }
  if (expect != kInf) throw ScenarioError(where, "last row must extend to infinity");
}

template <typename Row>
const Row& lookup(const std::vector<Row>& rows, double x) {
  for (const auto& r : rows) {
    if (x >= r.lo && x < r.hi) return r;
  }
  return rows.back();
}

}  // namespace

ExpertTables ExpertTables::rotor_default() {
  return {{{0.0, 1.0, 2, 2.0}, {1.0, 2.0, 4, 1.0}, {2.0, kInf, 6, 0.8}},
          {{0.0, 0.8, 1.0, 1.0, 8}, {0.8, 1.0, 0.8, 1.2, 10}, {1.0, kInf, 0.4, 1.6, 12}}};
}

ExpertTables ExpertTables::fixed_wing_default() {
  return {{{0.0, 1.0, 4, 2.0}, {1.0, 2.0, 8, 1.0}, {2.0, kInf, 12, 0.8}},
          {{0.0, 0.8, 1.0, 1.0, 10}, {0.8, 1.0, 0.8, 1.2, 12}, {1.0, kInf, 0.4, 1.6, 15}}};
}

void ExpertTables::validate(const std::string& where) const {
  check_rows(distance, where + "/distance");
  check_rows(discovery, where + "/discovery");
  for (std::size_t i = 0; i < distance.size(); ++i) {
    if (distance[i].j < 1) throw ScenarioError(where + "/distance/" + std::to_string(i) + "/j", "j must be >= 1");
  }
  for (std::size_t i = 0; i < discovery.size(); ++i) {
    if (discovery[i].m < 1) throw ScenarioError(where + "/discovery/" + std::to_string(i) + "/m", "m must be >= 1");
  }
}

ExpertOutput eval_expert(const ExpertInputs& in, const ExpertTables& tables, JRange feasible) {
  ExpertOutput out;
  out.e1 = in.b / in.b_star;
  out.e2 = in.total == 0 ? 1.0 : static_cast<double>(in.found) / in.total;
  const auto& d = lookup(tables.distance, out.e1);
  const auto& s = lookup(tables.discovery, out.e2);
  out.j = feasible.empty() ? d.j : feasible.clamp(d.j);
  out.kw3 = d.kw3;
  out.kw1 = s.kw1;
  out.kw2 = s.kw2;
  out.m = s.m;
  return out;
}

double closest_target_distance(Vec2 uav, std::span<const TargetReference> targets) {
  double best = kInf;
  for (const auto& t : targets) best = std::min(best, distance(uav, t.is_confirmed ? t.confirmed : t.prior));
  return best;
}

}  // namespace coopsearch
