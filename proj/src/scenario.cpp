#include "coopsearch/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "coopsearch/errors.hpp"

namespace coopsearch {

using json = nlohmann::json;

const char* to_string(UavKind kind) { return kind == UavKind::kRotor ? "rotor" : "fixed_wing"; }

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kDropout:
      return "dropout";
    case EventKind::kRangeChange:
      return "range_change";
    case EventKind::kTargetMove:
      return "target_move";
  }
  return "?";
}

UavType UavType::rotor_default() {
  UavType t;
  t.altitude = 40.0;
  t.jump = {1.0, 0.0, 35.0, 15.0};
  t.com_distance = 160.0;
  t.perc_distance = 300.0;
  t.fov = {40.0, 40.0, 0.0};
  t.ga = {100, 50, 0.5, 0.5, 1e-3, 10, 2};
  t.expert = ExpertTables::rotor_default();
  return t;
}

UavType UavType::fixed_wing_default() {
  UavType t;
  t.altitude = 200.0;
  t.jump = {1.0, 20.0, 70.0, 10.0};
  t.com_distance = 300.0;
  t.perc_distance = 600.0;
  t.fov = {};
  t.ga = {300, 50, 0.9, 0.9, 1e-3, 10, 2};
  t.expert = ExpertTables::fixed_wing_default();
  return t;
}

namespace {

// Typed access to one JSON object that remembers which keys were read so
// unknown keys can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ScenarioError(where(), "expected an object");
  }

  std::string where() const { return path_.empty() ? "/" : path_; }
  std::string at(const std::string& key) const { return path_ + "/" + key; }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ScenarioError(at(key), "missing required field");
    return j_.at(key);
  }

  double num(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ScenarioError(at(key), "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double def) { return has(key) ? num(key) : def; }

  // Numbers, or the strings "inf" / "infinity".
  double bound(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
      throw ScenarioError(at(key), "expected a number or \"inf\"");
    }
    return num(key);
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ScenarioError(at(key), "expected an integer");
  }
  long long integer(const std::string& key, long long def) { return has(key) ? integer(key) : def; }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ScenarioError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ScenarioError(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& def) { return has(key) ? str(key) : def; }

  Obj obj(const std::string& key) { return Obj(raw(key), at(key)); }

  const json& array(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ScenarioError(at(key), "expected an array");
    return v;
  }

  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ScenarioError(at(k), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

int to_int(long long v, const std::string& where) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ScenarioError(where, "integer out of range");
  }
  return static_cast<int>(v);
}

Vec2 point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ScenarioError(where, "expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void read_ga(Obj o, GaConfig& ga) {
  ga.population = to_int(o.integer("population", ga.population), o.at("population"));
  ga.max_generations = to_int(o.integer("max_generations", ga.max_generations), o.at("max_generations"));
  ga.mutation_rate = o.num("mutation_rate", ga.mutation_rate);
  ga.crossover_rate = o.num("crossover_rate", ga.crossover_rate);
  ga.epsilon = o.num("epsilon", ga.epsilon);
  ga.patience = to_int(o.integer("patience", ga.patience), o.at("patience"));
  ga.elite = to_int(o.integer("elite", ga.elite), o.at("elite"));
  o.done();
}

void read_expert(Obj o, ExpertTables& t) {
  if (o.has("distance")) {
    t.distance.clear();
    const json& rows = o.array("distance");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Obj r(rows[i], o.at("distance") + "/" + std::to_string(i));
      DistanceRow row;
      row.lo = r.bound("lo", 0.0);
      row.hi = r.bound("hi", std::numeric_limits<double>::infinity());
      row.j = to_int(r.integer("j"), r.at("j"));
      row.kw3 = r.num("kw3");
      r.done();
      t.distance.push_back(row);
    }
  }
  if (o.has("discovery")) {
    t.discovery.clear();
    const json& rows = o.array("discovery");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Obj r(rows[i], o.at("discovery") + "/" + std::to_string(i));
      DiscoveryRow row;
      row.lo = r.bound("lo", 0.0);
      row.hi = r.bound("hi", std::numeric_limits<double>::infinity());
      row.kw1 = r.num("kw1");
      row.kw2 = r.num("kw2");
      row.m = to_int(r.integer("m"), r.at("m"));
      r.done();
      t.discovery.push_back(row);
    }
  }
  o.done();
}

void read_type(Obj o, UavType& t) {
  t.altitude = o.num("altitude", t.altitude);
  t.jump.dt = o.num("dt", t.jump.dt);
  t.jump.v_min = o.num("v_min", t.jump.v_min);
  t.jump.v_max = o.num("v_max", t.jump.v_max);
  t.jump.a_max = o.num("a_max", t.jump.a_max);
  t.com_distance = o.num("com_distance", t.com_distance);
  t.perc_distance = o.num("perc_distance", t.perc_distance);
  if (o.has("fov")) {
    Obj f = o.obj("fov");
    t.fov.length = f.num("length", t.fov.length);
    t.fov.width = f.num("width", t.fov.width);
    t.fov.lead = f.num("lead", t.fov.lead);
    f.done();
  }
  o.done();
}

UavKind read_kind(Obj& o, const std::string& key) {
  const std::string k = o.str(key);
  if (k == "rotor") return UavKind::kRotor;
  if (k == "fixed_wing") return UavKind::kFixedWing;
  throw ScenarioError(o.at(key), "unknown UAV type \"" + k + "\" (expected rotor or fixed_wing)");
}

Scenario from_json(const json& doc) {
  Scenario s;
  Obj root(doc, "");
  s.name = root.str("name", s.name);

  {
    Obj a = root.obj("area");
    s.grid.r = a.num("cell_size", s.grid.r);
    const double w = a.num("width");
    const double h = a.num("height");
    if (!(s.grid.r > 0.0)) throw ScenarioError(a.at("cell_size"), "cell size must be positive");
    const double nx = w / s.grid.r;
    const double ny = h / s.grid.r;
    if (!(nx >= 1.0) || std::abs(nx - std::round(nx)) > 1e-9) {
      throw ScenarioError(a.at("width"), "width must be a positive multiple of cell_size");
    }
    if (!(ny >= 1.0) || std::abs(ny - std::round(ny)) > 1e-9) {
      throw ScenarioError(a.at("height"), "height must be a positive multiple of cell_size");
    }
    s.grid.lx = static_cast<int>(std::round(nx));
    s.grid.wy = static_cast<int>(std::round(ny));
    a.done();
  }

  if (root.has("sim")) {
    Obj o = root.obj("sim");
    s.dt = o.num("dt", s.dt);
    s.duration = o.num("duration", s.duration);
    s.strategy = to_int(o.integer("strategy", s.strategy), o.at("strategy"));
    const long long seed = o.integer("seed", static_cast<long long>(s.seed));
    if (seed < 0) throw ScenarioError(o.at("seed"), "seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
    s.early_exit = o.boolean("early_exit", s.early_exit);
    s.history = to_int(o.integer("history", s.history), o.at("history"));
    o.done();
  }

  if (root.has("overrides")) {
    Obj o = root.obj("overrides");
    s.sensor.p_detect = o.num("p_detect", s.sensor.p_detect);
    s.sensor.p_false_alarm = o.num("p_false_alarm", s.sensor.p_false_alarm);
    s.delta_p = o.num("delta_p", s.delta_p);
    s.weights.w1 = o.num("w1", s.weights.w1);
    s.weights.w2 = o.num("w2", s.weights.w2);
    s.weights.w3 = o.num("w3", s.weights.w3);
    s.repulsion.k = o.num("k", s.repulsion.k);
    s.repulsion.mu = o.num("mu", s.repulsion.mu);
    s.repulsion.d_max = o.num("d_max", s.repulsion.d_max);
    s.b_star = o.num("b_star", s.b_star);
    s.in_horizon_decay = o.boolean("in_horizon_decay", s.in_horizon_decay);
    s.peer_staleness = o.num("peer_staleness", s.peer_staleness);
    o.done();
  }

  if (root.has("uav_types")) {
    Obj o = root.obj("uav_types");
    if (o.has("rotor")) read_type(o.obj("rotor"), s.rotor);
    if (o.has("fixed_wing")) read_type(o.obj("fixed_wing"), s.fixed_wing);
    o.done();
  }
  if (root.has("ga")) {
    Obj o = root.obj("ga");
    if (o.has("rotor")) read_ga(o.obj("rotor"), s.rotor.ga);
    if (o.has("fixed_wing")) read_ga(o.obj("fixed_wing"), s.fixed_wing.ga);
    o.done();
  }
  if (root.has("expert_tables")) {
    Obj o = root.obj("expert_tables");
    if (o.has("rotor")) read_expert(o.obj("rotor"), s.rotor.expert);
    if (o.has("fixed_wing")) read_expert(o.obj("fixed_wing"), s.fixed_wing.expert);
    o.done();
  }

  {
    const json& arr = root.array("uavs");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Obj u(arr[i], "/uavs/" + std::to_string(i));
      UavSpec spec;
      spec.id = to_int(u.integer("id"), u.at("id"));
      spec.kind = read_kind(u, "type");
      if (u.has("x") || u.has("y")) {
        spec.spawn = {u.num("x"), u.num("y")};
        spec.spawn_given = true;
      }
      spec.heading = u.num("heading", 0.0);
      u.done();
      s.uavs.push_back(spec);
    }
  }

  if (root.has("targets")) {
    const json& arr = root.array("targets");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Obj t(arr[i], "/targets/" + std::to_string(i));
      TargetSpec spec;
      spec.truth = {t.num("x"), t.num("y")};
      spec.prior = {t.num("prior_x", spec.truth.x), t.num("prior_y", spec.truth.y)};
      spec.height = t.num("c", spec.height);
      spec.width = t.num("v", spec.width);
      t.done();
      s.targets.push_back(spec);
    }
  }

  if (root.has("denied_areas")) {
    const json& arr = root.array("denied_areas");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string w = "/denied_areas/" + std::to_string(i);
      Obj d(arr[i], w);
      DeniedSpec spec;
      const std::string shape = d.str("shape", "circle");
      if (shape == "circle") {
        spec.area.shape = DeniedArea::Shape::kCircle;
        spec.area.center = {d.num("x"), d.num("y")};
        spec.area.radius = d.num("radius");
      } else if (shape == "polygon") {
        spec.area.shape = DeniedArea::Shape::kPolygon;
        const json& vs = d.array("vertices");
        Vec2 sum;
        for (std::size_t k = 0; k < vs.size(); ++k) {
          spec.area.vertices.push_back(point(vs[k], d.at("vertices") + "/" + std::to_string(k)));
          sum += spec.area.vertices.back();
        }
        if (!vs.empty()) spec.area.center = sum * (1.0 / static_cast<double>(vs.size()));
      } else {
        throw ScenarioError(d.at("shape"), "unknown shape \"" + shape + "\" (expected circle or polygon)");
      }
      spec.speed = d.num("speed", 0.0);
      if (d.has("vx") || d.has("vy")) {
        spec.area.velocity = {d.num("vx", 0.0), d.num("vy", 0.0)};
        spec.velocity_given = true;
      }
      d.done();
      s.denied.push_back(spec);
    }
  }

  if (root.has("events")) {
    const json& arr = root.array("events");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Obj e(arr[i], "/events/" + std::to_string(i));
      EventSpec ev;
      ev.t = e.num("t");
      const std::string kind = e.str("kind");
      if (kind == "dropout") {
        ev.kind = EventKind::kDropout;
        ev.uav = to_int(e.integer("uav"), e.at("uav"));
      } else if (kind == "range_change") {
        ev.kind = EventKind::kRangeChange;
        ev.uav = to_int(e.integer("uav"), e.at("uav"));
        ev.range = e.bound("range", 0.0);
      } else if (kind == "target_move") {
        ev.kind = EventKind::kTargetMove;
        ev.target = to_int(e.integer("target"), e.at("target"));
        ev.position = {e.num("x"), e.num("y")};
      } else {
        throw ScenarioError(e.at("kind"), "unknown event kind \"" + kind + "\"");
      }
      e.done();
      s.events.push_back(ev);
    }
  }

  root.done();
  s.validate();
  return s;
}

void validate_type(const UavType& t, const GridSpec& grid, const std::string& where, bool needs_sensor) {
  if (!(t.altitude >= 0.0)) throw ScenarioError(where + "/altitude", "altitude must be non-negative");
  if (!(t.jump.dt > 0.0)) throw ScenarioError(where + "/dt", "decision interval must be positive");
  if (!(t.jump.v_min >= 0.0)) throw ScenarioError(where + "/v_min", "speed bounds must be non-negative");
  if (!(t.jump.v_max >= t.jump.v_min)) throw ScenarioError(where + "/v_max", "v_max must be at least v_min");
  if (!(t.jump.a_max > 0.0)) throw ScenarioError(where + "/a_max", "a_max must be positive");
  if (!(t.com_distance > 0.0)) throw ScenarioError(where + "/com_distance", "must be positive");
  if (!(t.perc_distance >= 0.0)) throw ScenarioError(where + "/perc_distance", "must be non-negative");
  if (!(t.fov.length >= 0.0 && t.fov.width >= 0.0)) throw ScenarioError(where + "/fov", "dimensions must be non-negative");
  if (needs_sensor && !t.fov.has_sensor()) throw ScenarioError(where + "/fov", "rotors need a sensor footprint");
  const JRangeReport rep = feasible_j_range(t.jump, grid.r);
  if (!rep.accel_feasible) {
    throw ScenarioError(where + "/a_max",
                        "grid too coarse for the turn rate: a_max must exceed " +
                            std::to_string(grid.r * std::sqrt(2.0) * std::acos(-1.0) / 4.0 /
                                           (t.jump.dt * t.jump.dt)) +
                            " m/s^2");
  }
  if (rep.range.empty()) {
    throw ScenarioError(where + "/v_max", "empty feasible j range: no jump value satisfies the speed and turn limits");
  }
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

void Scenario::validate() const {
  grid.validate();
  if (!(dt > 0.0)) throw ScenarioError("/sim/dt", "must be positive");
  if (!(duration > 0.0)) throw ScenarioError("/sim/duration", "must be positive");
  if (strategy < 1 || strategy > 3) throw ScenarioError("/sim/strategy", "strategy must be 1, 2 or 3");
  if (history < 1) throw ScenarioError("/sim/history", "must be at least 1");
  if (!(sensor.p_false_alarm > 0.0 && sensor.p_false_alarm < sensor.p_detect && sensor.p_detect <= 1.0)) {
    throw ScenarioError("/overrides/p_detect", "need 0 < p_false_alarm < p_detect <= 1");
  }
  if (!(delta_p > 0.0 && delta_p <= 1.0)) throw ScenarioError("/overrides/delta_p", "must be in (0,1]");
  if (!(weights.w1 >= 0.0 && weights.w2 >= 0.0 && weights.w3 >= 0.0)) {
    throw ScenarioError("/overrides/w1", "base weights must be non-negative");
  }
  if (!(repulsion.k > 0.0 && repulsion.mu > 0.0 && repulsion.d_max > 0.0)) {
    throw ScenarioError("/overrides/k", "repulsion parameters must be positive");
  }
  if (!(b_star > 0.0)) throw ScenarioError("/overrides/b_star", "must be positive");
  if (!(peer_staleness >= 0.0)) throw ScenarioError("/overrides/peer_staleness", "must be non-negative");

  validate_type(rotor, grid, "/uav_types/rotor", true);
  validate_type(fixed_wing, grid, "/uav_types/fixed_wing", false);
  rotor.ga.validate("/ga/rotor");
  fixed_wing.ga.validate("/ga/fixed_wing");
  rotor.expert.validate("/expert_tables/rotor");
  fixed_wing.expert.validate("/expert_tables/fixed_wing");

  std::vector<DeniedArea> areas;
  for (std::size_t i = 0; i < denied.size(); ++i) {
    const std::string w = "/denied_areas/" + std::to_string(i);
    const DeniedArea& a = denied[i].area;
    if (a.shape == DeniedArea::Shape::kCircle && !(a.radius > 0.0)) throw ScenarioError(w + "/radius", "must be positive");
    if (a.shape == DeniedArea::Shape::kPolygon && a.vertices.size() < 3) {
      throw ScenarioError(w + "/vertices", "a polygon needs at least 3 vertices");
    }
    if (!grid.contains(a.center)) throw ScenarioError(w, "centre outside task area");
    if (!(denied[i].speed >= 0.0)) throw ScenarioError(w + "/speed", "must be non-negative");
    areas.push_back(a);
  }

  if (uavs.empty()) throw ScenarioError("/uavs", "at least one UAV is required");
  std::set<int> ids;
  int rotors = 0;
  int fixed = 0;
  for (std::size_t i = 0; i < uavs.size(); ++i) {
    const std::string w = "/uavs/" + std::to_string(i);
    const UavSpec& u = uavs[i];
    if (u.id < 1) throw ScenarioError(w + "/id", "ids must be positive");
    if (!ids.insert(u.id).second) throw ScenarioError(w + "/id", "duplicate id " + std::to_string(u.id));
    (u.kind == UavKind::kRotor ? rotors : fixed)++;
    if (u.kind == UavKind::kRotor && !u.spawn_given) throw ScenarioError(w, "rotor spawn position (x, y) is required");
    if (u.spawn_given) {
      if (!grid.contains(u.spawn)) throw ScenarioError(w + "/x", "spawn outside task area");
      const Vec2 c = grid_to_world(grid, world_to_grid(grid, u.spawn));
      for (std::size_t k = 0; k < areas.size(); ++k) {
        if (areas[k].contains(c)) {
          throw ScenarioError(w + "/x", "spawn cell lies inside denied area " + std::to_string(k));
        }
      }
    }
    if (!std::isfinite(u.heading)) throw ScenarioError(w + "/heading", "must be finite");
  }
  if (rotors == 0) throw ScenarioError("/uavs", "at least one rotor is required");
  if (strategy == 3 && fixed == 0) throw ScenarioError("/sim/strategy", "strategy 3 needs a fixed_wing in the roster");

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string w = "/targets/" + std::to_string(i);
    const TargetSpec& t = targets[i];
    if (!grid.contains(t.truth)) throw ScenarioError(w + "/x", "target outside task area");
    if (!grid.contains(t.prior)) throw ScenarioError(w + "/prior_x", "prior position outside task area");
    if (!(t.height > 0.0 && t.height <= 1.0)) throw ScenarioError(w + "/c", "peak height must be in (0,1]");
    if (!(t.width > 0.0)) throw ScenarioError(w + "/v", "peak width must be positive");
  }

  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string w = "/events/" + std::to_string(i);
    const EventSpec& e = events[i];
    if (!(e.t >= 0.0)) throw ScenarioError(w + "/t", "event time must be non-negative");
    switch (e.kind) {
      case EventKind::kDropout:
      case EventKind::kRangeChange:
        if (!ids.count(e.uav)) throw ScenarioError(w + "/uav", "no UAV with id " + std::to_string(e.uav));
        if (e.kind == EventKind::kRangeChange && !(e.range > 0.0)) throw ScenarioError(w + "/range", "must be positive");
        break;
      case EventKind::kTargetMove:
        if (e.target < 0 || e.target >= static_cast<int>(targets.size())) {
          throw ScenarioError(w + "/target", "no target with index " + std::to_string(e.target));
        }
        if (!grid.contains(e.position)) throw ScenarioError(w + "/x", "position outside task area");
        break;
    }
  }
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ScenarioError(line_col(text, e.byte > 0 ? e.byte - 1 : 0), msg);
  }
  return from_json(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ValidationReport validate_scenario_text(const std::string& text) {
  ValidationReport rep;
  try {
    const Scenario s = parse_scenario(text);
    rep.ok = true;
    for (UavKind k : {UavKind::kRotor, UavKind::kFixedWing}) {
      const JRange r = feasible_j_range(s.type(k).jump, s.grid.r).range;
      rep.notes.push_back(std::string(to_string(k)) + ": feasible j in [" + std::to_string(r.lo) + ", " +
                          std::to_string(r.hi) + "]");
    }
    rep.notes.push_back("grid " + std::to_string(s.grid.lx) + " x " + std::to_string(s.grid.wy) + " cells");
  } catch (const ScenarioError& e) {
    rep.where = e.where();
    rep.message = e.what();
  }
  return rep;
}

}  // namespace coopsearch
