#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coopsearch/comms.hpp"
#include "coopsearch/expert_system.hpp"
#include "coopsearch/grid_world.hpp"
#include "coopsearch/jump_grid.hpp"
#include "coopsearch/objective.hpp"
#include "coopsearch/planner.hpp"
#include "coopsearch/scenario.hpp"

namespace coopsearch {

struct UavState {
  int id = 0;
  int slot = 0;  // index into stores and link computation
  UavKind kind = UavKind::kRotor;
  GridPose pose;
  double altitude = 0.0;
  JRange j_range;
  int j = 1;
  int m = 8;
  Weights weights;
  double com_distance = 0.0;
  double perc_distance = 0.0;
  bool alive = true;
  SearchMap map;  // private belief; the comms store is held by the engine per slot
  std::vector<std::uint8_t> known_denied;  // perceived denied areas, by index
  double trajectory_length = 0.0;
  int last_u = 0;
  int last_j = 0;
};

struct MetricsFrame {
  double t = 0.0;
  double global_chi = 0.0;
  double global_p = 0.0;
  int targets_found = 0;
  int links = 0;
  int contacts = 0;  // receivers that acquired new sensing records this epoch
  std::vector<double> uav_chi;  // per active UAV slot; 0 once the UAV is gone
  std::vector<double> uav_p;
  std::vector<double> uav_length;
  std::vector<std::uint8_t> uav_alive;
};

struct TrajectoryRow {
  int uav = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  int j = 0;
  int u = 0;
};

struct EventRow {
  double t = 0.0;
  std::string kind;
  int uav = 0;  // 0 when not UAV specific
  std::string detail;
};

struct LinkRow {
  double t = 0.0;
  int a = 0;  // UAV ids
  int b = 0;
};

struct DecisionRow {
  double t = 0.0;
  int uav = 0;
  DecisionDiagnostics diag;
  int u = 0;
  bool emergency = false;
};

struct ExpertRow {
  double t = 0.0;
  int uav = 0;
  ExpertOutput out;
};

// One receiver acquiring remote sensing records in one epoch.
struct ContactRow {
  double t = 0.0;
  int receiver = 0;
  std::size_t poses = 0;
  std::size_t cells = 0;
  double chi_before = 0.0;
  double chi_after = 0.0;
  double chi_drop = 0.0;  // replay accounting
};

struct RunOptions {
  std::optional<int> strategy;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  int snapshot_every = 0;  // epochs; 0 disables snapshots
  std::function<void(double t, const SearchMap& global)> on_snapshot;
  bool keep_decisions = true;
};

struct RunResult {
  int strategy = 1;
  std::uint64_t seed = 0;
  std::vector<int> uav_ids;  // per slot
  std::vector<UavKind> uav_kinds;
  std::vector<MetricsFrame> metrics;
  std::vector<TrajectoryRow> trajectory;
  std::vector<EventRow> events;
  std::vector<LinkRow> links;
  std::vector<DecisionRow> decisions;
  std::vector<ExpertRow> expert;
  std::vector<ContactRow> contacts;
  std::vector<double> discovered_at;  // per target, -1 if never
  double all_found_at = -1.0;
  int emergencies = 0;
  int violations = 0;            // boundary / denied-area occupancy outside EMERGENCY epochs
  int emergency_violations = 0;  // the same, during EMERGENCY epochs
  bool chi_consistent = true;    // every alive UAV's sum of chi equals the global one, every epoch
  double max_chi_gap = 0.0;
  bool contact_accounting_ok = true;  // every contact lowers chi by exactly its replay accounting
  std::uint64_t dropped_records = 0;
  std::uint64_t decode_failures = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t anomalies = 0;
  double decision_ms_total = 0.0;
  double decision_ms_max = 0.0;
  std::size_t decision_count = 0;
  std::vector<DeniedArea> denied_initial;
  std::vector<Target> targets;
};

// Closed loop for one (scenario, seed). Deterministic for a given scenario
// and seed apart from the wall-clock fields of the decision diagnostics.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

struct RunSummary {
  int strategy = 1;
  std::uint64_t seed = 0;
  double final_chi = 0.0;
  double final_p = 0.0;
  int targets_found = 0;
  int contact_epochs = 0;  // distinct (receiver, epoch) pairs among rotors
  bool contact_accounting_ok = true;
  int emergencies = 0;
  int violations = 0;
  double all_found_at = -1.0;
  double mean_decision_ms = 0.0;
};

RunSummary summarize(const RunResult& r);

struct StrategyCurves {
  int strategy = 1;
  std::vector<double> t;
  std::vector<double> mean_chi;
  std::vector<double> mean_p;
  std::vector<RunSummary> runs;  // one per seed, in seed order
};

struct CompareReport {
  std::vector<StrategyCurves> strategies;
};

CompareReport compare_strategies(const Scenario& base, const std::vector<int>& strategies,
                                 const std::vector<std::uint64_t>& seeds, std::optional<double> duration = {},
                                 const std::function<void(const RunResult&)>& on_run = {});

struct GaBenchCell {
  int m = 0;
  int j = 0;
  std::size_t decisions = 0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
  double mean_generations = 0.0;
  double mean_evaluations = 0.0;
  double mean_j_used = 0.0;
  int emergencies = 0;
};

// Planner timing over a fixed sample of rotor poses on the scenario's prior
// map with every denied area known and the expert system bypassed: each cell
// of the (m, j) sweep plans from the same poses.
std::vector<GaBenchCell> ga_bench(const Scenario& scenario, const std::vector<int>& ms, const std::vector<int>& js,
                                  int decisions_per_cell, std::uint64_t seed);

}  // namespace coopsearch
