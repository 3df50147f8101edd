#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "coopsearch/rng.hpp"

namespace coopsearch {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Grid cell, 1-based on both axes: x in [1, L_x], y in [1, W_y].
struct Cell {
  int x = 1;
  int y = 1;

  Cell operator+(Cell o) const { return {x + o.x, y + o.y}; }
  auto operator<=>(const Cell&) const = default;
};

struct GridSpec {
  double r = 4.0;  // cell side, metres
  int lx = 1;      // cells along x
  int wy = 1;      // cells along y

  double width() const { return r * lx; }
  double height() const { return r * wy; }
  std::size_t size() const { return static_cast<std::size_t>(lx) * static_cast<std::size_t>(wy); }

  bool contains(Cell c) const { return c.x >= 1 && c.x <= lx && c.y >= 1 && c.y <= wy; }
  bool contains(Vec2 p) const { return p.x >= 0.0 && p.x <= width() && p.y >= 0.0 && p.y <= height(); }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y - 1) * static_cast<std::size_t>(lx) +
           static_cast<std::size_t>(c.x - 1);
  }
  Cell cell_at(std::size_t idx) const {
    return {static_cast<int>(idx % static_cast<std::size_t>(lx)) + 1,
            static_cast<int>(idx / static_cast<std::size_t>(lx)) + 1};
  }

  // Throws ScenarioError when r <= 0 or a dimension is < 1.
  void validate() const;
};

// Cell centre in metres. Throws std::out_of_range for cells outside the grid.
Vec2 grid_to_world(const GridSpec& grid, Cell cell);
// Containing cell of an in-area position; the far edges belong to the last
// row/column. Throws std::out_of_range for positions outside the area.
Cell world_to_grid(const GridSpec& grid, Vec2 pos);

struct SensorModel {
  double p_detect = 0.8;
  double p_false_alarm = 1e-4;
};

// Posterior target-existence probability after one sensor reading.
// Returns NaN when the denominator is not positive (only reachable with
// P_D = 1 on the miss branch at p = 1); callers treat that as an anomaly.
double bayes_update(double p, bool detection, const SensorModel& sensor);

struct TargetPrior {
  Vec2 position;
  double height = 0.3;  // c_n
  double width = 50.0;  // v_n, metres
};

// Per-UAV belief layers over the grid.
class SearchMap {
 public:
  SearchMap() = default;
  SearchMap(const GridSpec& grid, int owner);

  const GridSpec& grid() const { return grid_; }
  int owner() const { return owner_; }

  double p(std::size_t idx) const { return p_[idx]; }
  double chi(std::size_t idx) const { return chi_[idx]; }
  bool found(std::size_t idx) const { return found_[idx] != 0; }
  double p(Cell c) const { return p_[grid_.index(c)]; }
  double chi(Cell c) const { return chi_[grid_.index(c)]; }
  bool found(Cell c) const { return found_[grid_.index(c)] != 0; }

  void set_p(std::size_t idx, double v) { p_[idx] = v; }
  void set_chi(std::size_t idx, double v) { chi_[idx] = v; }
  void set_found(std::size_t idx, bool v) { found_[idx] = v ? 1 : 0; }

  // One sensor covering of a cell: Bayes update, clamp, chi halving and the
  // found latch (set once p >= delta_p, never cleared). Returns the new p.
  double observe(std::size_t idx, bool detection, const SensorModel& sensor, double delta_p);

  double sum_p() const;
  double sum_chi() const;

  std::span<const double> p_layer() const { return p_; }
  std::span<const double> chi_layer() const { return chi_; }
  std::span<const std::uint8_t> found_layer() const { return found_; }

  std::uint64_t anomalies() const { return anomalies_; }

 private:
  GridSpec grid_;
  int owner_ = 0;
  std::vector<double> p_;
  std::vector<double> chi_;
  std::vector<std::uint8_t> found_;
  std::uint64_t anomalies_ = 0;
};

// Gaussian prior mixture evaluated at cell centres, clamped to 1; chi = 1.
// Throws ScenarioError for priors outside the area or invalid c_n / v_n.
SearchMap init_probability(const GridSpec& grid, std::span<const TargetPrior> priors, int owner = 0);

struct Target {
  int id = 0;
  Vec2 truth;
  Vec2 prior;
  double height = 0.3;
  double width = 50.0;
  bool discovered = false;
  double discovered_at = -1.0;
};

struct Observation {
  std::size_t cell = 0;  // grid index
  bool detection = false;
};

// One Bernoulli sensor draw per covered cell, in the given order: P_D where a
// true target occupies the cell, P_F elsewhere.
std::vector<Observation> sense_cells(const GridSpec& grid, std::span<const Cell> cells,
                                     std::span<const Target> truth, const SensorModel& sensor, Rng& rng);

// Applies observations in order. Returns the indices of covered cells whose
// probability is at or above delta_p afterwards.
std::vector<std::size_t> apply_observations(SearchMap& map, std::span<const Observation> obs,
                                            const SensorModel& sensor, double delta_p);

struct DetectionResult {
  std::vector<Observation> observations;
  std::vector<int> confirmed_targets;  // ids of true targets in cells at/above delta_p
};

// Sense + update for one footprint. A target is confirmed only when its own
// cell reaches delta_p; the first confirmation stamps `discovered_at`.
DetectionResult apply_detection_footprint(SearchMap& map, std::span<const Cell> fov_cells, std::span<Target> truth,
                                          const SensorModel& sensor, double delta_p, double now, Rng& rng);

// Sensor footprint: a rectangle `length` along the heading by `width` across,
// centred `lead` metres ahead of the UAV. length == 0 means no sensor.
struct FovGeometry {
  double length = 0.0;
  double width = 0.0;
  double lead = 0.0;

  bool has_sensor() const { return length > 0.0 && width > 0.0; }
};

// Cells whose centres fall inside the footprint (half-open in the local
// frame: [-L/2, L/2) x [-W/2, W/2)), clipped to the grid, ordered by index.
std::vector<Cell> rasterize_fov(const GridSpec& grid, Vec2 pos, float heading_deg, const FovGeometry& fov);

// Footprint offsets for UAVs sitting on a cell centre, memoised per heading.
// Produces exactly the cells rasterize_fov would for the same pose.
class FootprintCache {
 public:
  FootprintCache(const GridSpec& grid, const FovGeometry& fov) : grid_(grid), fov_(fov) {}

  const std::vector<Cell>& offsets(float heading_deg) { return entry(heading_deg).offsets; }

  // Calls f(index) for every in-bounds footprint cell around `cell`, in
  // ascending index order.
  template <typename F>
  void for_each_index(Cell cell, float heading_deg, F&& f) {
    const Entry& e = entry(heading_deg);
    if (cell.x + e.min_dx >= 1 && cell.x + e.max_dx <= grid_.lx && cell.y + e.min_dy >= 1 &&
        cell.y + e.max_dy <= grid_.wy) {
      const auto base = static_cast<std::ptrdiff_t>(grid_.index(cell));
      for (std::ptrdiff_t d : e.deltas) f(static_cast<std::size_t>(base + d));
      return;
    }
    for (Cell o : e.offsets) {
      const Cell c = cell + o;
      if (grid_.contains(c)) f(grid_.index(c));
    }
  }

  // Appends grid indices of the in-bounds footprint cells around `cell`.
  void cells(Cell cell, float heading_deg, std::vector<std::size_t>& out);
  std::vector<Cell> cells(Cell cell, float heading_deg);

  const FovGeometry& fov() const { return fov_; }

 private:
  struct Entry {
    std::vector<Cell> offsets;
    std::vector<std::ptrdiff_t> deltas;  // index offsets, valid when fully inside
    int min_dx = 0;
    int max_dx = 0;
    int min_dy = 0;
    int max_dy = 0;
  };

  const Entry& entry(float heading_deg) {
    if (last_ != nullptr && last_heading_ == heading_deg) return *last_;
    auto it = cache_.find(heading_deg);
    if (it == cache_.end()) it = cache_.emplace(heading_deg, build(heading_deg)).first;
    last_heading_ = heading_deg;
    last_ = &it->second;
    return *last_;
  }
  Entry build(float heading_deg) const;

  GridSpec grid_;
  FovGeometry fov_;
  std::map<float, Entry> cache_;
  float last_heading_ = 0.0f;
  const Entry* last_ = nullptr;
};

struct DeniedArea {
  enum class Shape { kCircle, kPolygon };

  Shape shape = Shape::kCircle;
  Vec2 center;
  double radius = 0.0;
  std::vector<Vec2> vertices;  // polygon only, absolute metres
  Vec2 velocity;

  bool contains(Vec2 p) const;
  // Distance to the boundary, negative inside.
  double signed_distance(Vec2 p) const;
  void translate(Vec2 d);
};

// Moves each area by velocity * dt; a centre leaving the area is mirrored
// back across the boundary and that velocity component flips.
void advance_denied_areas(std::span<DeniedArea> areas, const GridSpec& grid, double dt);

}  // namespace coopsearch
