#include "coopsearch/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "coopsearch/errors.hpp"
#include "coopsearch/rng.hpp"

namespace coopsearch {

namespace {

constexpr std::uint64_t kPlanStream = 1;
constexpr std::uint64_t kSenseStream = 2;
constexpr std::uint64_t kWorldStream = 3;

Vec2 position(const GridSpec& grid, Cell c) { return {grid.r * (c.x - 0.5), grid.r * (c.y - 0.5)}; }

class Engine {
 public:
  Engine(const Scenario& sc, const RunOptions& opt) : sc_(sc), opt_(opt), grid_(sc.grid) {
    res_.strategy = opt.strategy.value_or(sc.strategy);
    if (res_.strategy < 1 || res_.strategy > 3) throw ScenarioError("/sim/strategy", "strategy must be 1, 2 or 3");
    res_.seed = opt.seed.value_or(sc.seed);
    const double duration = opt.duration.value_or(sc.duration);
    if (!(duration > 0.0)) throw ScenarioError("/sim/duration", "must be positive");
    epochs_ = static_cast<long>(std::floor(duration / sc.dt + 1e-9));
    setup();
  }

  RunResult run() {
    epoch(0);
    for (long k = 1; k <= epochs_; ++k) {
      epoch(k);
      if (sc_.early_exit && res_.all_found_at >= 0.0) break;
    }
    for (const auto& u : uavs_) res_.anomalies += u.map.anomalies();
    res_.anomalies += global_.anomalies();
    res_.targets = targets_;
    return std::move(res_);
  }

 private:
  void setup() {
    for (const auto& u : sc_.uavs) {
      if (res_.strategy == 3 || u.kind == UavKind::kRotor) roster_.push_back(u);
    }
    std::stable_sort(roster_.begin(), roster_.end(), [](const UavSpec& a, const UavSpec& b) { return a.id < b.id; });

    std::vector<TargetPrior> priors;
    for (std::size_t i = 0; i < sc_.targets.size(); ++i) {
      const auto& t = sc_.targets[i];
      priors.push_back({t.prior, t.height, t.width});
      Target tg;
      tg.id = static_cast<int>(i);
      tg.truth = t.truth;
      tg.prior = t.prior;
      tg.height = t.height;
      tg.width = t.width;
      targets_.push_back(tg);
    }
    const SearchMap base = init_probability(grid_, priors);
    global_ = base;

    Rng world = Rng::derive(res_.seed, 0, kWorldStream);
    for (const auto& d : sc_.denied) {
      DeniedArea a = d.area;
      if (!d.velocity_given && d.speed > 0.0) {
        const double th = world.uniform01() * 2.0 * std::numbers::pi;
        a.velocity = {d.speed * std::cos(th), d.speed * std::sin(th)};
      }
      denied_.push_back(a);
    }
    res_.denied_initial = denied_;

    rotor_fov_ = std::make_unique<FootprintCache>(grid_, sc_.rotor.fov);
    fixed_fov_ = std::make_unique<FootprintCache>(grid_, sc_.fixed_wing.fov);

    const int n = static_cast<int>(roster_.size());
    const int n_t = static_cast<int>(targets_.size());
    for (int slot = 0; slot < n; ++slot) {
      const UavSpec& spec = roster_[static_cast<std::size_t>(slot)];
      const UavType& type = sc_.type(spec.kind);
      UavState u;
      u.id = spec.id;
      u.slot = slot;
      u.kind = spec.kind;
      const Vec2 spawn = spec.spawn_given ? spec.spawn : Vec2{grid_.width() / 2.0, grid_.height() / 2.0};
      u.pose.cell = world_to_grid(grid_, spawn);
      u.altitude = type.altitude;
      u.j_range = feasible_j_range(type.jump, grid_.r).range;
      u.j = u.j_range.hi;
      u.pose.heading = normalize_heading(spec.heading);
      u.pose.number = heading_to_number(u.pose.heading, u.j);
      u.weights = sc_.weights;
      u.com_distance = res_.strategy == 1 ? kUnlimitedRange : type.com_distance;
      u.perc_distance = type.perc_distance;
      u.map = base;
      u.known_denied.assign(denied_.size(), 0);
      uavs_.push_back(std::move(u));
      stores_.emplace_back(n, sc_.history, n_t);
      plan_rng_.push_back(Rng::derive(res_.seed, static_cast<std::uint64_t>(slot) + 1, kPlanStream));
      sense_rng_.push_back(Rng::derive(res_.seed, static_cast<std::uint64_t>(slot) + 1, kSenseStream));
      fov_by_slot_.push_back(spec.kind == UavKind::kRotor ? rotor_fov_.get() : fixed_fov_.get());
      res_.uav_ids.push_back(spec.id);
      res_.uav_kinds.push_back(spec.kind);
    }
    applied_.assign(sc_.events.size(), 0);
    res_.discovered_at.assign(targets_.size(), -1.0);
  }

  FootprintCache& fov(const UavState& u) { return *fov_by_slot_[static_cast<std::size_t>(u.slot)]; }
  InfoStore& store(const UavState& u) { return stores_[static_cast<std::size_t>(u.slot)]; }

  void perceive(UavState& u) {
    const Vec2 pos = position(grid_, u.pose.cell);
    for (std::size_t i = 0; i < denied_.size(); ++i) {
      if (!u.known_denied[i] && denied_[i].signed_distance(pos) <= u.perc_distance) u.known_denied[i] = 1;
    }
  }

  ThreatModel threats(const UavState& u) const {
    ThreatModel tm;
    tm.grid = grid_;
    for (std::size_t i = 0; i < denied_.size(); ++i) {
      if (u.known_denied[i]) tm.denied.push_back(denied_[i]);
    }
    return tm;
  }

  ExpertOutput expert(UavState& u, double t) {
    const InfoStore& st = store(u);
    std::vector<TargetReference> refs;
    for (std::size_t i = 0; i < targets_.size(); ++i) {
      const TargetEntry& e = st.targets()[i];
      refs.push_back({targets_[i].prior, {e.x, e.y}, e.filled()});
    }
    ExpertInputs in;
    in.b = closest_target_distance(position(grid_, u.pose.cell), refs);
    in.b_star = sc_.b_star;
    in.found = st.targets_confirmed();
    in.total = static_cast<int>(targets_.size());
    const ExpertOutput out = eval_expert(in, sc_.type(u.kind).expert, u.j_range);
    u.j = out.j;
    u.m = out.m;
    u.weights.kw1 = out.kw1;
    u.weights.kw2 = out.kw2;
    u.weights.kw3 = out.kw3;
    res_.expert.push_back({t, u.id, out});
    return out;
  }

  // Last-known positions of other alive rotors from this UAV's own store.
  std::vector<Vec2> known_rotors(const UavState& self, double t, double staleness) {
    std::vector<Vec2> out;
    const InfoStore& st = store(self);
    for (const auto& other : uavs_) {
      if (other.slot == self.slot || !other.alive || other.kind != UavKind::kRotor) continue;
      const History& h = st.history(other.slot);
      if (h.empty() || t - h.back().t > staleness) continue;
      out.push_back({h.back().x, h.back().y});
    }
    return out;
  }

  void sense(UavState& u, double t) {
    cells_ = fov(u).cells(u.pose.cell, static_cast<float>(u.pose.heading));
    const DetectionResult det = apply_detection_footprint(u.map, cells_, targets_, sc_.sensor, sc_.delta_p, t,
                                                          sense_rng_[static_cast<std::size_t>(u.slot)]);
    apply_observations(global_, det.observations, sc_.sensor, sc_.delta_p);
    for (int id : det.confirmed_targets) {
      const Vec2 c = position(grid_, world_to_grid(grid_, targets_[static_cast<std::size_t>(id)].truth));
      if (store(u).confirm_target(id, {static_cast<float>(c.x), static_cast<float>(c.y), static_cast<float>(t)})) {
        res_.events.push_back({t, "target_confirmed", u.id, "target " + std::to_string(id)});
      }
      auto& at = res_.discovered_at[static_cast<std::size_t>(id)];
      if (at < 0.0) at = t;
    }
  }

  void record(UavState& u, double t) {
    const Vec2 p = position(grid_, u.pose.cell);
    store(u).record(u.slot, {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(u.pose.heading),
                             static_cast<float>(t)});
  }

  void check_occupancy(const UavState& u, double t, bool emergency, bool left_area) {
    const Vec2 p = position(grid_, u.pose.cell);
    bool bad = left_area;
    for (const auto& a : denied_) bad = bad || a.contains(p);
    if (!bad) return;
    if (emergency) {
      ++res_.emergency_violations;
    } else {
      ++res_.violations;
    }
    res_.events.push_back({t, emergency ? "violation_emergency" : "violation", u.id, left_area ? "boundary" : "denied"});
  }

  void move(UavState& u, double t) {
    perceive(u);
    expert(u, t);
    const ThreatModel tm = threats(u);
    Rng& rng = plan_rng_[static_cast<std::size_t>(u.slot)];
    const UavType& type = sc_.type(u.kind);
    Decision d;
    if (u.kind == UavKind::kRotor) {
      PlanningContext ctx;
      ctx.map = &u.map;
      ctx.fov = &fov(u);
      ctx.threats = &tm;
      ctx.peers = known_rotors(u, t, sc_.peer_staleness);
      ctx.weights = u.weights;
      ctx.repulsion = sc_.repulsion;
      d = plan_with_fallback(u.pose, u.j, u.m, ctx, type.ga, rng);
    } else {
      const auto cluster = known_rotors(u, t, std::numeric_limits<double>::infinity());
      d = relay_plan(u.pose, u.j, u.m, tm, cluster, type.ga, rng);
    }
    res_.decision_ms_total += d.diag.wall_ms;
    res_.decision_ms_max = std::max(res_.decision_ms_max, d.diag.wall_ms);
    ++res_.decision_count;
    if (d.emergency) {
      ++res_.emergencies;
      res_.events.push_back({t, "emergency", u.id, "j " + std::to_string(d.j) + " u " + std::to_string(d.u)});
    }
    if (opt_.keep_decisions) res_.decisions.push_back({t, u.id, d.diag, d.u, d.emergency});

    const Vec2 before = position(grid_, u.pose.cell);
    GridPose next = step(with_jump(u.pose, d.j), d.u, d.j);
    bool left_area = false;
    if (!grid_.contains(next.cell)) {
      left_area = true;
      next.cell.x = std::clamp(next.cell.x, 1, grid_.lx);
      next.cell.y = std::clamp(next.cell.y, 1, grid_.wy);
    }
    u.pose = next;
    u.last_u = d.u;
    u.last_j = d.j;
    u.trajectory_length += distance(before, position(grid_, u.pose.cell));
    check_occupancy(u, t, d.emergency, left_area);
  }

  void exchange(double t) {
    std::vector<CommNode> nodes;
    for (const auto& u : uavs_) nodes.push_back({u.alive, position(grid_, u.pose.cell), u.altitude, u.com_distance});
    const Delivery del = deliver(stores_, nodes, sc_.dt);
    res_.bytes_sent += del.bytes;
    res_.decode_failures += del.decode_failures;
    links_ = static_cast<int>(del.links.size());
    for (const Link& l : del.links) {
      res_.links.push_back({t, uavs_[static_cast<std::size_t>(l.a)].id, uavs_[static_cast<std::size_t>(l.b)].id});
    }
    contacts_ = 0;
    for (auto& u : uavs_) {
      const MergeResult& m = del.received[static_cast<std::size_t>(u.slot)];
      res_.dropped_records += m.dropped_records;
      if (!u.alive || u.kind != UavKind::kRotor || m.replay.empty()) continue;
      const bool sensing = std::any_of(m.replay.begin(), m.replay.end(), [&](const ReplayRecord& r) {
        return fov_by_slot_[static_cast<std::size_t>(r.uav)]->fov().has_sensor();
      });
      if (!sensing) continue;
      ContactRow row;
      row.t = t;
      row.receiver = u.id;
      row.chi_before = u.map.sum_chi();
      const ReplayStats rs =
          replay_detections(u.map, m.replay, fov_by_slot_, store(u).targets(), sc_.sensor, sc_.delta_p);
      row.chi_after = u.map.sum_chi();
      row.poses = rs.poses;
      row.cells = rs.cells;
      row.chi_drop = rs.chi_drop;
      const double jump = row.chi_before - row.chi_after;
      if (!(jump > 0.0) || std::abs(jump - rs.chi_drop) > 1e-9 * std::max(1.0, row.chi_before)) {
        res_.contact_accounting_ok = false;
      }
      res_.contacts.push_back(row);
      ++contacts_;
    }
  }

  void apply_events(double t) {
    for (std::size_t i = 0; i < sc_.events.size(); ++i) {
      const EventSpec& e = sc_.events[i];
      if (applied_[i] || e.t > t + 1e-9) continue;
      applied_[i] = 1;
      switch (e.kind) {
        case EventKind::kDropout: {
          UavState* u = find(e.uav);
          if (u == nullptr) break;  // not part of this strategy's roster
          u->alive = false;
          res_.events.push_back({t, "dropout", u->id, ""});
          break;
        }
        case EventKind::kRangeChange: {
          UavState* u = find(e.uav);
          if (u == nullptr) break;
          if (res_.strategy == 1) {
            res_.events.push_back({t, "range_change_ignored", u->id, "unlimited links in strategy 1"});
          } else {
            u->com_distance = e.range;
            res_.events.push_back({t, "range_change", u->id, std::to_string(e.range)});
          }
          break;
        }
        case EventKind::kTargetMove: {
          targets_[static_cast<std::size_t>(e.target)].truth = e.position;
          res_.events.push_back({t, "target_move", 0, "target " + std::to_string(e.target)});
          break;
        }
      }
    }
  }

  UavState* find(int id) {
    for (auto& u : uavs_) {
      if (u.id == id) return &u;
    }
    return nullptr;
  }

  void metrics(double t, long k) {
    MetricsFrame f;
    f.t = t;
    f.global_chi = global_.sum_chi();
    f.global_p = global_.sum_p();
    f.targets_found = static_cast<int>(std::count_if(targets_.begin(), targets_.end(), [](const Target& x) { return x.discovered; }));
    f.links = links_;
    f.contacts = contacts_;
    for (const auto& u : uavs_) {
      const bool tracked = u.alive && u.kind == UavKind::kRotor;
      const double chi = tracked ? u.map.sum_chi() : 0.0;
      f.uav_chi.push_back(chi);
      f.uav_p.push_back(tracked ? u.map.sum_p() : 0.0);
      f.uav_length.push_back(u.trajectory_length);
      f.uav_alive.push_back(u.alive ? 1 : 0);
      if (tracked && res_.strategy == 1) {
        const double gap = std::abs(chi - f.global_chi);
        res_.max_chi_gap = std::max(res_.max_chi_gap, gap);
        if (chi != f.global_chi) res_.chi_consistent = false;
      }
    }
    if (res_.all_found_at < 0.0 && !targets_.empty() && f.targets_found == static_cast<int>(targets_.size())) {
      res_.all_found_at = t;
    }
    res_.metrics.push_back(std::move(f));
    if (opt_.snapshot_every > 0 && opt_.on_snapshot && k % opt_.snapshot_every == 0) opt_.on_snapshot(t, global_);
  }

  void epoch(long k) {
    const double t = static_cast<double>(k) * sc_.dt;
    for (auto& u : uavs_) {
      if (!u.alive) continue;
      if (k > 0) {
        move(u, t);
      } else {
        perceive(u);
      }
      if (u.kind == UavKind::kRotor) sense(u, t);
      record(u, t);
      const Vec2 p = position(grid_, u.pose.cell);
      res_.trajectory.push_back({u.id, t, p.x, p.y, u.pose.heading, u.last_j, u.last_u});
    }
    exchange(t);
    apply_events(t);
    if (k > 0) advance_denied_areas(denied_, grid_, sc_.dt);
    metrics(t, k);
  }

  const Scenario& sc_;
  const RunOptions& opt_;
  GridSpec grid_;
  long epochs_ = 0;
  RunResult res_;
  std::vector<UavSpec> roster_;
  std::vector<UavState> uavs_;
  std::vector<InfoStore> stores_;
  std::vector<Rng> plan_rng_;
  std::vector<Rng> sense_rng_;
  std::unique_ptr<FootprintCache> rotor_fov_;
  std::unique_ptr<FootprintCache> fixed_fov_;
  std::vector<FootprintCache*> fov_by_slot_;
  std::vector<Target> targets_;
  std::vector<DeniedArea> denied_;
  SearchMap global_;
  std::vector<std::uint8_t> applied_;
  std::vector<Cell> cells_;
  int links_ = 0;
  int contacts_ = 0;
};

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
  Engine e(scenario, options);
  return e.run();
}

RunSummary summarize(const RunResult& r) {
  RunSummary s;
  s.strategy = r.strategy;
  s.seed = r.seed;
  if (!r.metrics.empty()) {
    s.final_chi = r.metrics.back().global_chi;
    s.final_p = r.metrics.back().global_p;
    s.targets_found = r.metrics.back().targets_found;
  }
  s.contact_epochs = static_cast<int>(r.contacts.size());
  s.contact_accounting_ok = r.contact_accounting_ok;
  s.emergencies = r.emergencies;
  s.violations = r.violations;
  s.all_found_at = r.all_found_at;
  s.mean_decision_ms = r.decision_count ? r.decision_ms_total / static_cast<double>(r.decision_count) : 0.0;
  return s;
}

CompareReport compare_strategies(const Scenario& base, const std::vector<int>& strategies,
                                 const std::vector<std::uint64_t>& seeds, std::optional<double> duration,
                                 const std::function<void(const RunResult&)>& on_run) {
  if (seeds.empty()) throw std::invalid_argument("compare_strategies needs at least one seed");
  CompareReport rep;
  for (int s : strategies) {
    StrategyCurves curves;
    curves.strategy = s;
    for (std::uint64_t seed : seeds) {
      RunOptions opt;
      opt.strategy = s;
      opt.seed = seed;
      opt.duration = duration;
      opt.keep_decisions = static_cast<bool>(on_run);
      const RunResult r = run(base, opt);
      if (curves.t.empty()) {
        for (const auto& f : r.metrics) curves.t.push_back(f.t);
        curves.mean_chi.assign(curves.t.size(), 0.0);
        curves.mean_p.assign(curves.t.size(), 0.0);
      }
      for (std::size_t i = 0; i < curves.t.size(); ++i) {
        const auto& f = r.metrics[std::min(i, r.metrics.size() - 1)];
        curves.mean_chi[i] += f.global_chi;
        curves.mean_p[i] += f.global_p;
      }
      curves.runs.push_back(summarize(r));
      if (on_run) on_run(r);
    }
    const double n = static_cast<double>(seeds.size());
    for (auto& v : curves.mean_chi) v /= n;
    for (auto& v : curves.mean_p) v /= n;
    rep.strategies.push_back(std::move(curves));
  }
  return rep;
}

std::vector<GaBenchCell> ga_bench(const Scenario& sc, const std::vector<int>& ms, const std::vector<int>& js,
                                  int decisions_per_cell, std::uint64_t seed) {
  if (decisions_per_cell < 1) throw std::invalid_argument("ga_bench needs at least one decision per cell");
  std::vector<TargetPrior> priors;
  for (const auto& t : sc.targets) priors.push_back({t.prior, t.height, t.width});
  const SearchMap map = init_probability(sc.grid, priors);
  ThreatModel tm;
  tm.grid = sc.grid;
  for (const auto& d : sc.denied) tm.denied.push_back(d.area);
  FootprintCache fov(sc.grid, sc.rotor.fov);

  Rng rng = Rng::derive(seed, 0, kWorldStream);
  std::vector<GridPose> poses;
  while (static_cast<int>(poses.size()) < decisions_per_cell) {
    GridPose p;
    p.cell = {rng.uniform_int(1, sc.grid.lx), rng.uniform_int(1, sc.grid.wy)};
    if (tm.clearance(position(sc.grid, p.cell)) <= 0.0) continue;
    p.heading = normalize_heading(45.0 * rng.uniform_int(0, 7));
    poses.push_back(p);
  }
  std::vector<Vec2> peers;
  for (const auto& u : sc.uavs) {
    if (u.kind == UavKind::kRotor && u.spawn_given) peers.push_back(u.spawn);
  }

  std::vector<GaBenchCell> out;
  for (int m : ms) {
    for (int j : js) {
      GaBenchCell cell;
      cell.m = m;
      cell.j = j;
      Rng plan = Rng::derive(seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(j));
      for (const GridPose& pose : poses) {
        PlanningContext ctx;
        ctx.map = &map;
        ctx.fov = &fov;
        ctx.threats = &tm;
        ctx.peers = peers;
        ctx.weights = sc.weights;
        ctx.repulsion = sc.repulsion;
        const Decision d = plan_with_fallback(pose, j, m, ctx, sc.rotor.ga, plan);
        ++cell.decisions;
        cell.mean_ms += d.diag.wall_ms;
        cell.max_ms = std::max(cell.max_ms, d.diag.wall_ms);
        cell.mean_generations += d.diag.generations;
        cell.mean_evaluations += static_cast<double>(d.diag.evaluations);
        cell.mean_j_used += d.diag.j_used;
        if (d.emergency) ++cell.emergencies;
      }
      const double n = static_cast<double>(cell.decisions);
      cell.mean_ms /= n;
      cell.mean_generations /= n;
      cell.mean_evaluations /= n;
      cell.mean_j_used /= n;
      out.push_back(cell);
    }
  }
  return out;
}

}  // namespace coopsearch
