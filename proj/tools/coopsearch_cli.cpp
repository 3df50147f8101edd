#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coopsearch/errors.hpp"
#include "coopsearch/report.hpp"
#include "coopsearch/scenario.hpp"
#include "coopsearch/sim_engine.hpp"
#include "coopsearch/stats.hpp"

namespace fs = std::filesystem;
using namespace coopsearch;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3, kRuntime = 4 };

fs::path default_out() {
  const char* env = std::getenv("COOPSEARCH_OUT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("out");
}

struct Common {
  std::string scenario;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int strategy = 0;
  double duration = 0.0;
  int verbosity = 0;
};

RunOptions options_for(const Common& c, std::uint64_t seed) {
  RunOptions opt;
  opt.seed = seed;
  if (c.strategy != 0) opt.strategy = c.strategy;
  if (c.duration > 0.0) opt.duration = c.duration;
  return opt;
}

std::vector<std::uint64_t> seeds_or_default(const Common& c, const Scenario& sc) {
  return c.seeds.empty() ? std::vector<std::uint64_t>{sc.seed} : c.seeds;
}

fs::path out_dir(const Common& c) { return c.out.empty() ? default_out() : fs::path(c.out); }

int cmd_validate(const Common& c) {
  std::ifstream in(c.scenario, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file " + c.scenario);
  std::ostringstream ss;
  ss << in.rdbuf();
  const ValidationReport rep = validate_scenario_text(ss.str());
  if (!rep.ok) {
    std::cerr << c.scenario << ": " << rep.message << '\n';
    return kValidation;
  }
  std::cout << c.scenario << ": ok\n";
  for (const auto& n : rep.notes) std::cout << "  " << n << '\n';
  return kOk;
}

int cmd_run(const Common& c, int snapshot_every) {
  const Scenario sc = load_scenario(c.scenario);
  const auto seeds = seeds_or_default(c, sc);
  const fs::path root = out_dir(c);
  std::vector<RunSummary> summaries;
  for (std::uint64_t seed : seeds) {
    const fs::path dir = root / ("seed_" + std::to_string(seed));
    RunOptions opt = options_for(c, seed);
    opt.snapshot_every = snapshot_every;
    opt.on_snapshot = [&](double t, const SearchMap& map) {
      const std::string stamp = "t" + format_number(t);
      auto p = open_output(dir / "snapshots" / ("p_" + stamp + ".csv"));
      write_layer_csv(p, map, Layer::kP);
      auto chi = open_output(dir / "snapshots" / ("chi_" + stamp + ".csv"));
      write_layer_csv(chi, map, Layer::kChi);
    };
    const RunResult r = run(sc, opt);
    const auto files = write_run_artifacts(dir, sc, r);
    const RunSummary s = summarize(r);
    summaries.push_back(s);
    std::printf("seed %llu strategy %d: targets %d/%zu, all found at %s s, final sum chi %.3f, final sum p %.3f, "
                "mean GA time %.3f ms, emergencies %d, violations %d\n",
                static_cast<unsigned long long>(seed), s.strategy, s.targets_found, sc.targets.size(),
                s.all_found_at >= 0.0 ? format_number(s.all_found_at).c_str() : "-", s.final_chi, s.final_p,
                s.mean_decision_ms, s.emergencies, s.violations);
    if (c.verbosity > 0) {
      for (const auto& f : files) std::printf("  wrote %s\n", f.string().c_str());
    }
  }
  if (seeds.size() > 1) {
    auto out = open_output(root / "aggregate.csv");
    CompareReport rep;
    StrategyCurves curves;
    curves.strategy = summaries.front().strategy;
    curves.runs = summaries;
    rep.strategies.push_back(curves);
    write_compare_summary_csv(out, rep);
    std::printf("wrote %s\n", (root / "aggregate.csv").string().c_str());
  }
  return kOk;
}

int cmd_compare(const Common& c, const std::vector<int>& strategies, bool keep_runs) {
  const Scenario sc = load_scenario(c.scenario);
  const auto seeds = seeds_or_default(c, sc);
  const fs::path root = out_dir(c);
  std::optional<double> duration;
  if (c.duration > 0.0) duration = c.duration;
  std::function<void(const RunResult&)> on_run;
  if (keep_runs) {
    on_run = [&](const RunResult& r) {
      write_run_artifacts(root / ("strategy_" + std::to_string(r.strategy)) / ("seed_" + std::to_string(r.seed)), sc,
                          r);
    };
  }
  const CompareReport rep = compare_strategies(sc, strategies, seeds, duration, on_run);
  {
    auto out = open_output(root / "curves.csv");
    write_compare_curves_csv(out, rep);
  }
  {
    auto out = open_output(root / "summary.csv");
    write_compare_summary_csv(out, rep);
  }
  for (const auto& s : rep.strategies) {
    std::printf("strategy %d: mean final sum chi %.3f, mean final sum p %.3f\n", s.strategy, s.mean_chi.back(),
                s.mean_p.back());
  }
  std::printf("wrote %s and %s\n", (root / "curves.csv").string().c_str(), (root / "summary.csv").string().c_str());
  return kOk;
}

int cmd_ga_bench(const Common& c, const std::vector<int>& ms, const std::vector<int>& js, int decisions) {
  const Scenario sc = load_scenario(c.scenario);
  const std::uint64_t seed = c.seeds.empty() ? sc.seed : c.seeds.front();
  const auto cells = ga_bench(sc, ms, js, decisions, seed);
  std::printf("%4s %4s %10s %10s %10s\n", "m", "j", "mean_ms", "max_ms", "mean_j");
  std::vector<double> mv, jv, tv;
  for (const auto& cell : cells) {
    std::printf("%4d %4d %10.3f %10.3f %10.2f\n", cell.m, cell.j, cell.mean_ms, cell.max_ms, cell.mean_j_used);
    mv.push_back(cell.m);
    jv.push_back(cell.j);
    tv.push_back(cell.mean_ms);
  }
  if (cells.size() > 1) {
    std::printf("spearman(m, mean_ms) = %.3f, spearman(j, mean_ms) = %.3f\n", spearman(mv, tv), spearman(jv, tv));
  }
  const fs::path path = out_dir(c) / "ga_bench.csv";
  auto out = open_output(path);
  write_ga_bench_csv(out, cells);
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

void add_common(CLI::App* cmd, Common& c, bool multi_seed) {
  cmd->add_option("--scenario", c.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  if (multi_seed) cmd->add_option("--seed", c.seeds, "Seed; repeat for several runs");
  cmd->add_option("--out", c.out, "Output directory (default: $COOPSEARCH_OUT or ./out)");
  cmd->add_option("--duration", c.duration, "Override the scenario duration, seconds")->check(CLI::PositiveNumber);
  cmd->add_flag("-v,--verbose", c.verbosity, "More output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-UAV search simulator"};
  app.require_subcommand(1);
  Common c;
  int snapshot_every = 0;
  std::vector<int> strategies{1, 2, 3};
  bool keep_runs = false;
  std::vector<int> ms{6, 8, 10};
  std::vector<int> js{2, 4, 6};
  int decisions = 30;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", c.scenario, "Scenario file (JSON)")->required();

  auto* run_cmd = app.add_subcommand("run", "Run the closed loop for one or more seeds");
  add_common(run_cmd, c, true);
  run_cmd->add_option("--strategy", c.strategy, "Override the scenario strategy")->check(CLI::Range(1, 3));
  run_cmd->add_option("--snapshot-every", snapshot_every, "Write global map layers every N epochs")
      ->check(CLI::NonNegativeNumber);

  auto* compare = app.add_subcommand("compare", "Compare strategies over seeds");
  add_common(compare, c, true);
  compare->add_option("--strategy", strategies, "Strategies to compare (repeatable)")->check(CLI::Range(1, 3));
  compare->add_flag("--keep-runs", keep_runs, "Also write every run's logs");

  auto* bench = app.add_subcommand("ga-bench", "Planner timing over an (m, j) sweep");
  add_common(bench, c, true);
  bench->add_option("--m", ms, "Horizon values (repeatable)")->check(CLI::PositiveNumber);
  bench->add_option("--j", js, "Jump values (repeatable)")->check(CLI::PositiveNumber);
  bench->add_option("--decisions", decisions, "Decisions per sweep cell")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*run_cmd) return cmd_run(c, snapshot_every);
    if (*compare) return cmd_compare(c, strategies, keep_runs);
    if (*bench) return cmd_ga_bench(c, ms, js, decisions);
  } catch (const ScenarioError& e) {
    std::cerr << c.scenario << ": " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
