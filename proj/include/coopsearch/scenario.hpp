#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "coopsearch/expert_system.hpp"
#include "coopsearch/grid_world.hpp"
#include "coopsearch/jump_grid.hpp"
#include "coopsearch/objective.hpp"
#include "coopsearch/planner.hpp"

namespace coopsearch {

enum class UavKind { kRotor, kFixedWing };

const char* to_string(UavKind kind);

// Per-kind parameter block: kinematics, radio, perception, sensor, planning.
struct UavType {
  double altitude = 40.0;
  JumpParams jump;
  double com_distance = 160.0;
  double perc_distance = 300.0;
  FovGeometry fov;
  GaConfig ga;
  ExpertTables expert;

  static UavType rotor_default();
  static UavType fixed_wing_default();
};

struct UavSpec {
  int id = 0;
  UavKind kind = UavKind::kRotor;
  Vec2 spawn;
  bool spawn_given = false;  // fixed-wing defaults to the area centroid
  double heading = 0.0;
};

struct TargetSpec {
  Vec2 truth;
  Vec2 prior;
  double height = 0.3;
  double width = 50.0;
};

struct DeniedSpec {
  DeniedArea area;
  double speed = 0.0;       // m/s; direction drawn per run when velocity is not given
  bool velocity_given = false;
};

enum class EventKind { kDropout, kRangeChange, kTargetMove };

const char* to_string(EventKind kind);

struct EventSpec {
  double t = 0.0;
  EventKind kind = EventKind::kDropout;
  int uav = 0;            // dropout, range_change
  double range = 0.0;     // range_change, metres
  int target = 0;         // target_move, 0-based index
  Vec2 position;          // target_move
};

inline constexpr double kUnlimitedRange = std::numeric_limits<double>::infinity();

struct Scenario {
  std::string name = "scenario";
  GridSpec grid;
  double dt = 1.0;
  double duration = 300.0;
  int strategy = 1;
  std::uint64_t seed = 1;
  bool early_exit = false;
  int history = 100;

  SensorModel sensor;
  double delta_p = 0.95;
  Weights weights;  // base weights; corrections come from the expert tables
  RepulsionParams repulsion;
  double b_star = 160.0;
  bool in_horizon_decay = true;
  double peer_staleness = 10.0;  // seconds a last-known peer position stays usable

  UavType rotor = UavType::rotor_default();
  UavType fixed_wing = UavType::fixed_wing_default();
  std::vector<UavSpec> uavs;
  std::vector<TargetSpec> targets;
  std::vector<DeniedSpec> denied;
  std::vector<EventSpec> events;

  const UavType& type(UavKind kind) const { return kind == UavKind::kRotor ? rotor : fixed_wing; }

  // Schema-independent checks: geometry, physics feasibility, table coverage,
  // roster and event references. Throws ScenarioError with a JSON pointer.
  void validate() const;
};

// Parses and validates a scenario document. Parse errors are reported as
// "line:col"; field errors as JSON pointers.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct ValidationReport {
  bool ok = false;
  std::string where;
  std::string message;
  std::vector<std::string> notes;  // per-kind feasible j ranges and similar facts
};

ValidationReport validate_scenario_text(const std::string& text);

}  // namespace coopsearch
