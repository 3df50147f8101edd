#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "coopsearch/scenario.hpp"
#include "coopsearch/sim_engine.hpp"

namespace coopsearch {

// Shortest round-trippable text for a double; identical inputs give
// identical bytes.
std::string format_number(double v);

void write_metrics_csv(std::ostream& out, const RunResult& r);
void write_trajectory_csv(std::ostream& out, const RunResult& r);
void write_events_csv(std::ostream& out, const RunResult& r);
void write_links_csv(std::ostream& out, const RunResult& r);
void write_decisions_csv(std::ostream& out, const RunResult& r);
void write_expert_csv(std::ostream& out, const RunResult& r);
void write_contacts_csv(std::ostream& out, const RunResult& r);

enum class Layer { kP, kChi, kFound };
// One row per grid row (y ascending), one column per cell.
void write_layer_csv(std::ostream& out, const SearchMap& map, Layer layer);

// Area outline, denied areas, targets and every UAV's track.
void write_trajectory_svg(std::ostream& out, const Scenario& sc, const RunResult& r);

void write_compare_curves_csv(std::ostream& out, const CompareReport& rep);
void write_compare_summary_csv(std::ostream& out, const CompareReport& rep);
void write_ga_bench_csv(std::ostream& out, const std::vector<GaBenchCell>& cells);

// Opens `path` for writing (creating parent directories) or throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

// Writes every per-run log into `dir`; returns the files written.
std::vector<std::filesystem::path> write_run_artifacts(const std::filesystem::path& dir, const Scenario& sc,
                                                       const RunResult& r);

}  // namespace coopsearch
