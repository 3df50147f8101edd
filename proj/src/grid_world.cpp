#include "coopsearch/grid_world.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "coopsearch/errors.hpp"

namespace coopsearch {

void GridSpec::validate() const {
  if (!(r > 0.0)) throw ScenarioError("/area/cell_size", "cell size must be positive");
  if (lx < 1 || wy < 1) throw ScenarioError("/area", "grid must have at least one cell per axis");
}

Vec2 grid_to_world(const GridSpec& grid, Cell cell) {
  if (!grid.contains(cell)) {
    throw std::out_of_range("cell (" + std::to_string(cell.x) + "," + std::to_string(cell.y) + ") outside grid");
  }
  return {grid.r * (cell.x - 0.5), grid.r * (cell.y - 0.5)};
}

Cell world_to_grid(const GridSpec& grid, Vec2 pos) {
  if (!grid.contains(pos)) {
    throw std::out_of_range("position (" + std::to_string(pos.x) + "," + std::to_string(pos.y) + ") outside area");
  }
  const int x = std::min(static_cast<int>(std::floor(pos.x / grid.r)) + 1, grid.lx);
  const int y = std::min(static_cast<int>(std::floor(pos.y / grid.r)) + 1, grid.wy);
  return {x, y};
}

double bayes_update(double p, bool detection, const SensorModel& sensor) {
  const double pd = sensor.p_detect;
  const double pf = sensor.p_false_alarm;
  double num;
  double den;
  if (detection) {
    num = pd * p;
    den = pf + (pd - pf) * p;
  } else {
    num = (1.0 - pd) * p;
    den = 1.0 - pd * p - pf * (1.0 - p);
  }
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(num / den, 0.0, 1.0);
}

SearchMap::SearchMap(const GridSpec& grid, int owner)
    : grid_(grid), owner_(owner), p_(grid.size(), 0.0), chi_(grid.size(), 1.0), found_(grid.size(), 0) {}

double SearchMap::observe(std::size_t idx, bool detection, const SensorModel& sensor, double delta_p) {
  double next = bayes_update(p_[idx], detection, sensor);
  if (std::isnan(next)) {
    ++anomalies_;
    next = detection ? 1.0 : 0.0;
  }
  p_[idx] = next;
  chi_[idx] *= 0.5;
  if (next >= delta_p) found_[idx] = 1;
  return next;
}

double SearchMap::sum_p() const {
  double s = 0.0;
  for (double v : p_) s += v;
  return s;
}

double SearchMap::sum_chi() const {
  double s = 0.0;
  for (double v : chi_) s += v;
  return s;
}

SearchMap init_probability(const GridSpec& grid, std::span<const TargetPrior> priors, int owner) {
  for (std::size_t i = 0; i < priors.size(); ++i) {
    const auto& pr = priors[i];
    const std::string where = "/targets/" + std::to_string(i);
    if (!grid.contains(pr.position)) throw ScenarioError(where + "/prior", "prior position outside task area");
    if (!(pr.height > 0.0 && pr.height <= 1.0)) throw ScenarioError(where + "/c", "peak height must be in (0,1]");
    if (!(pr.width > 0.0)) throw ScenarioError(where + "/v", "peak width must be positive");
  }
  SearchMap map(grid, owner);
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Vec2 c = grid_to_world(grid, grid.cell_at(idx));
    double p = 0.0;
    for (const auto& pr : priors) {
      const double dx = c.x - pr.position.x;
      const double dy = c.y - pr.position.y;
      p += pr.height * std::exp(-(dx * dx + dy * dy) / (pr.width * pr.width));
    }
    map.set_p(idx, std::min(p, 1.0));
  }
  return map;
}

namespace {

bool target_in_cell(const GridSpec& grid, const Target& t, std::size_t idx) {
  return grid.contains(t.truth) && grid.index(world_to_grid(grid, t.truth)) == idx;
}

}  // namespace

std::vector<Observation> sense_cells(const GridSpec& grid, std::span<const Cell> cells,
                                     std::span<const Target> truth, const SensorModel& sensor, Rng& rng) {
  std::vector<std::size_t> target_cells;
  target_cells.reserve(truth.size());
  for (const auto& t : truth) {
    if (grid.contains(t.truth)) target_cells.push_back(grid.index(world_to_grid(grid, t.truth)));
  }
  std::vector<Observation> out;
  out.reserve(cells.size());
  for (Cell c : cells) {
    const std::size_t idx = grid.index(c);
    const bool occupied = std::find(target_cells.begin(), target_cells.end(), idx) != target_cells.end();
    const double u = rng.uniform01();
    out.push_back({idx, occupied ? u < sensor.p_detect : u < sensor.p_false_alarm});
  }
  return out;
}

std::vector<std::size_t> apply_observations(SearchMap& map, std::span<const Observation> obs,
                                            const SensorModel& sensor, double delta_p) {
  std::vector<std::size_t> over;
  for (const auto& o : obs) {
    if (map.observe(o.cell, o.detection, sensor, delta_p) >= delta_p) over.push_back(o.cell);
  }
  return over;
}

DetectionResult apply_detection_footprint(SearchMap& map, std::span<const Cell> fov_cells, std::span<Target> truth,
                                          const SensorModel& sensor, double delta_p, double now, Rng& rng) {
  DetectionResult res;
  res.observations = sense_cells(map.grid(), fov_cells, truth, sensor, rng);
  const auto over = apply_observations(map, res.observations, sensor, delta_p);
  for (auto& t : truth) {
    const bool hit = std::any_of(over.begin(), over.end(),
                                 [&](std::size_t idx) { return target_in_cell(map.grid(), t, idx); });
    if (!hit) continue;
    res.confirmed_targets.push_back(t.id);
    if (!t.discovered) {
      t.discovered = true;
      t.discovered_at = now;
    }
  }
  return res;
}

namespace {

constexpr double kBoundaryEps = 1e-9;

struct Frame {
  double c;
  double s;
  double half_l;
  double half_w;
  double lead;

  bool inside(double dx, double dy) const {
    const double u = dx * c + dy * s - lead;
    const double v = -dx * s + dy * c;
    return u >= -half_l - kBoundaryEps && u < half_l - kBoundaryEps && v >= -half_w - kBoundaryEps &&
           v < half_w - kBoundaryEps;
  }
  double reach() const { return std::hypot(half_l + std::abs(lead), half_w); }
};

Frame make_frame(float heading_deg, const FovGeometry& fov) {
  const double h = static_cast<double>(heading_deg) * std::numbers::pi / 180.0;
  return {std::cos(h), std::sin(h), fov.length / 2.0, fov.width / 2.0, fov.lead};
}

}  // namespace

std::vector<Cell> rasterize_fov(const GridSpec& grid, Vec2 pos, float heading_deg, const FovGeometry& fov) {
  std::vector<Cell> out;
  if (!fov.has_sensor()) return out;
  const Frame f = make_frame(heading_deg, fov);
  const double reach = f.reach() + grid.r;
  const int x0 = std::max(1, static_cast<int>(std::floor((pos.x - reach) / grid.r)));
  const int x1 = std::min(grid.lx, static_cast<int>(std::ceil((pos.x + reach) / grid.r)) + 1);
  const int y0 = std::max(1, static_cast<int>(std::floor((pos.y - reach) / grid.r)));
  const int y1 = std::min(grid.wy, static_cast<int>(std::ceil((pos.y + reach) / grid.r)) + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double cx = grid.r * (x - 0.5);
      const double cy = grid.r * (y - 0.5);
      if (f.inside(cx - pos.x, cy - pos.y)) out.push_back({x, y});
    }
  }
  return out;
}

FootprintCache::Entry FootprintCache::build(float heading_deg) const {
  Entry e;
  if (fov_.has_sensor()) {
    const Frame f = make_frame(heading_deg, fov_);
    const int k = static_cast<int>(std::ceil(f.reach() / grid_.r)) + 1;
    for (int dy = -k; dy <= k; ++dy) {
      for (int dx = -k; dx <= k; ++dx) {
        if (!f.inside(grid_.r * dx, grid_.r * dy)) continue;
        e.offsets.push_back({dx, dy});
        e.deltas.push_back(static_cast<std::ptrdiff_t>(dy) * grid_.lx + dx);
        e.min_dx = std::min(e.min_dx, dx);
        e.max_dx = std::max(e.max_dx, dx);
        e.min_dy = std::min(e.min_dy, dy);
        e.max_dy = std::max(e.max_dy, dy);
      }
    }
  }
  return e;
}

void FootprintCache::cells(Cell cell, float heading_deg, std::vector<std::size_t>& out) {
  for_each_index(cell, heading_deg, [&](std::size_t idx) { out.push_back(idx); });
}

std::vector<Cell> FootprintCache::cells(Cell cell, float heading_deg) {
  std::vector<Cell> out;
  for (Cell o : offsets(heading_deg)) {
    const Cell c = cell + o;
    if (grid_.contains(c)) out.push_back(c);
  }
  return out;
}

bool DeniedArea::contains(Vec2 p) const { return signed_distance(p) < 0.0; }

double DeniedArea::signed_distance(Vec2 p) const {
  if (shape == Shape::kCircle) return distance(p, center) - radius;
  // Polygon: distance to nearest edge, sign from even-odd crossing test.
  double best = std::numeric_limits<double>::infinity();
  bool inside = false;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
    const Vec2 a = vertices[k];
    const Vec2 b = vertices[i];
    const Vec2 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, distance(p, a + ab * t));
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside ? -best : best;
}

void DeniedArea::translate(Vec2 d) {
  center += d;
  for (auto& v : vertices) v += d;
}

void advance_denied_areas(std::span<DeniedArea> areas, const GridSpec& grid, double dt) {
  for (auto& a : areas) {
    if (a.velocity.x == 0.0 && a.velocity.y == 0.0) continue;
    Vec2 next = a.center + a.velocity * dt;
    if (next.x < 0.0) {
      next.x = -next.x;
      a.velocity.x = -a.velocity.x;
    } else if (next.x > grid.width()) {
      next.x = 2.0 * grid.width() - next.x;
      a.velocity.x = -a.velocity.x;
    }
    if (next.y < 0.0) {
      next.y = -next.y;
      a.velocity.y = -a.velocity.y;
    } else if (next.y > grid.height()) {
      next.y = 2.0 * grid.height() - next.y;
      a.velocity.y = -a.velocity.y;
    }
    a.translate(next - a.center);
  }
}

}  // namespace coopsearch
