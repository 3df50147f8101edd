#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>

#include "coopsearch/report.hpp"
#include "coopsearch/scenario.hpp"
#include "coopsearch/sim_engine.hpp"

using namespace coopsearch;

namespace {

const std::filesystem::path kScenarioDir = COOPSEARCH_SCENARIO_DIR;

Scenario paper(int strategy, double duration) {
  Scenario s = load_scenario(kScenarioDir / "paper_default.json");
  s.strategy = strategy;
  s.duration = duration;
  return s;
}

RunOptions seeded(std::uint64_t seed) {
  RunOptions o;
  o.seed = seed;
  return o;
}

int slot_of(const RunResult& r, int id) {
  const auto it = std::find(r.uav_ids.begin(), r.uav_ids.end(), id);
  return it == r.uav_ids.end() ? -1 : static_cast<int>(it - r.uav_ids.begin());
}

template <typename Writer>
std::string render(Writer w, const RunResult& r) {
  std::ostringstream ss;
  w(ss, r);
  return ss.str();
}

void expect_monotone_bookkeeping(const RunResult& r) {
  for (std::size_t k = 1; k < r.metrics.size(); ++k) {
    const MetricsFrame& a = r.metrics[k - 1];
    const MetricsFrame& b = r.metrics[k];
    EXPECT_LE(b.global_chi, a.global_chi) << "t " << b.t;
    EXPECT_GE(b.targets_found, a.targets_found);
    for (std::size_t s = 0; s < b.uav_length.size(); ++s) {
      EXPECT_GE(b.uav_length[s], a.uav_length[s]);
      if (b.uav_alive[s] != 0) {
        EXPECT_LE(b.uav_chi[s], a.uav_chi[s]) << "slot " << s << " t " << b.t;
      }
    }
  }
}

}  // namespace

TEST(SimEngine, DropoutZeroesTheUavAfterItsEvent) {
  const RunResult r = run(paper(1, 130), seeded(1));
  const int s4 = slot_of(r, 4);
  ASSERT_GE(s4, 0);
  for (const auto& f : r.metrics) {
    const auto s = static_cast<std::size_t>(s4);
    if (f.t < 100.0) {
      EXPECT_GT(f.uav_chi[s], 0.0);
    } else {
      EXPECT_EQ(f.uav_chi[s], 0.0) << "t " << f.t;
      EXPECT_EQ(f.uav_p[s], 0.0);
      EXPECT_EQ(f.uav_alive[s], 0);
      EXPECT_EQ(f.uav_length[s], r.metrics[100].uav_length[s]);
    }
  }
  for (const auto& row : r.trajectory) {
    if (row.uav == 4) {
      EXPECT_LE(row.t, 100.0);
    }
  }
  EXPECT_TRUE(std::any_of(r.events.begin(), r.events.end(),
                          [](const EventRow& e) { return e.kind == "dropout" && e.uav == 4 && e.t == 100.0; }));
}

TEST(SimEngine, StrategyOneKeepsEveryUavConsistentWithTheGlobalMap) {
  const RunResult r = run(paper(1, 120), seeded(2));
  EXPECT_TRUE(r.chi_consistent);
  EXPECT_EQ(r.max_chi_gap, 0.0);
  EXPECT_EQ(r.violations, 0);
  expect_monotone_bookkeeping(r);
}

TEST(SimEngine, SameSeedGivesIdenticalLogs) {
  const Scenario sc = paper(3, 40);
  const RunResult a = run(sc, seeded(5));
  const RunResult b = run(sc, seeded(5));
  EXPECT_EQ(render(write_metrics_csv, a), render(write_metrics_csv, b));
  EXPECT_EQ(render(write_trajectory_csv, a), render(write_trajectory_csv, b));
  EXPECT_EQ(render(write_events_csv, a), render(write_events_csv, b));
  EXPECT_EQ(render(write_links_csv, a), render(write_links_csv, b));
  const RunResult c = run(sc, seeded(6));
  EXPECT_NE(render(write_trajectory_csv, a), render(write_trajectory_csv, c));
}

TEST(SimEngine, ConstrainedStrategiesKeepBookkeepingInvariants) {
  for (int strategy : {2, 3}) {
    const RunResult r = run(paper(strategy, 120), seeded(3));
    SCOPED_TRACE(strategy);
    expect_monotone_bookkeeping(r);
    EXPECT_TRUE(r.contact_accounting_ok);
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(r.decode_failures, 0u);
    for (const auto& c : r.contacts) {
      EXPECT_LT(c.chi_after, c.chi_before);
      EXPECT_NEAR(c.chi_before - c.chi_after, c.chi_drop, 1e-9 * std::max(1.0, c.chi_before));
    }
  }
}

TEST(SimEngine, DiscoveredExactlyWhenConfirmed) {
  const RunResult r = run(paper(2, 150), seeded(4));
  ASSERT_EQ(r.discovered_at.size(), r.targets.size());
  for (std::size_t k = 0; k < r.targets.size(); ++k) {
    const std::string tag = "target " + std::to_string(k);
    const auto first = std::find_if(r.events.begin(), r.events.end(), [&](const EventRow& e) {
      return e.kind == "target_confirmed" && e.detail == tag;
    });
    EXPECT_EQ(r.targets[k].discovered, r.discovered_at[k] >= 0.0);
    if (first == r.events.end()) {
      EXPECT_LT(r.discovered_at[k], 0.0);
    } else {
      EXPECT_EQ(first->t, r.discovered_at[k]);
    }
  }
  for (const auto& f : r.metrics) {
    const auto found = std::count_if(r.discovered_at.begin(), r.discovered_at.end(),
                                     [&](double at) { return at >= 0.0 && at <= f.t; });
    EXPECT_EQ(f.targets_found, found);
  }
}

TEST(SimEngine, TwoDropoutsLeaveTheRestLinked) {
  Scenario sc = paper(1, 40);
  sc.events.clear();
  for (auto [t, id] : {std::pair{20.0, 3}, std::pair{30.0, 4}}) {
    EventSpec e;
    e.t = t;
    e.kind = EventKind::kDropout;
    e.uav = id;
    sc.events.push_back(e);
  }
  const RunResult r = run(sc, seeded(1));
  for (const auto& f : r.metrics) {
    // Events act after the exchange of their own epoch.
    const int expected = f.t <= 20.0 ? 6 : (f.t <= 30.0 ? 3 : 1);
    EXPECT_EQ(f.links, expected) << "t " << f.t;
  }
  for (const auto& l : r.links) {
    if (l.t > 30.0) {
      EXPECT_TRUE(l.a != 3 && l.a != 4 && l.b != 3 && l.b != 4);
    }
  }
}

TEST(SimEngine, RangeChangeWidensOneUavsReach) {
  Scenario sc = paper(2, 20);
  sc.events.clear();
  EventSpec e;
  e.t = 5.0;
  e.kind = EventKind::kRangeChange;
  e.uav = 1;
  e.range = 5000.0;
  sc.events.push_back(e);
  const RunResult r = run(sc, seeded(1));
  for (const auto& f : r.metrics) {
    if (f.t > 5.0) {
      EXPECT_GE(f.links, 3) << "t " << f.t;
    }
  }
}

TEST(SimEngine, TargetMoveRelocatesTheTruth) {
  Scenario sc = paper(1, 15);
  sc.events.clear();
  EventSpec e;
  e.t = 1.0;
  e.kind = EventKind::kTargetMove;
  e.target = 0;
  e.position = {702.0, 306.0};
  sc.events.push_back(e);
  const RunResult r = run(sc, seeded(1));
  EXPECT_DOUBLE_EQ(r.targets[0].truth.x, 702.0);
  EXPECT_DOUBLE_EQ(r.targets[0].truth.y, 306.0);
  EXPECT_TRUE(std::any_of(r.events.begin(), r.events.end(),
                          [](const EventRow& ev) { return ev.kind == "target_move" && ev.t == 1.0; }));
}

TEST(SimEngine, HeterogeneousRunFliesTheFixedWing) {
  const RunResult r = run(paper(3, 60), seeded(1));
  const int fw = slot_of(r, 5);
  ASSERT_GE(fw, 0);
  EXPECT_EQ(r.uav_kinds[static_cast<std::size_t>(fw)], UavKind::kFixedWing);
  int rows = 0;
  for (const auto& row : r.trajectory) {
    if (row.uav != 5) continue;
    ++rows;
    if (row.t > 0.0) {
      EXPECT_GE(row.j, 6);
      EXPECT_LE(row.j, 12);
    }
  }
  EXPECT_EQ(rows, 61);
  EXPECT_GT(r.links.size(), 0u);
  EXPECT_FALSE(r.contacts.empty());
}

TEST(SimEngine, HomogeneousRunsLeaveTheFixedWingOut) {
  const RunResult r = run(paper(2, 5), seeded(1));
  EXPECT_EQ(slot_of(r, 5), -1);
}

TEST(SimEngine, EarlyExitStopsWhenAllTargetsAreFound) {
  Scenario sc = paper(1, 300);
  sc.early_exit = true;
  const RunResult r = run(sc, seeded(4));
  ASSERT_GE(r.all_found_at, 0.0);
  EXPECT_EQ(r.metrics.back().t, r.all_found_at);
}

TEST(CompareStrategies, SingleRunDegeneratesToRun) {
  const Scenario sc = paper(1, 20);
  const CompareReport rep = compare_strategies(sc, {2}, {7});
  ASSERT_EQ(rep.strategies.size(), 1u);
  ASSERT_EQ(rep.strategies[0].runs.size(), 1u);
  RunOptions opt = seeded(7);
  opt.strategy = 2;
  const RunSummary direct = summarize(run(sc, opt));
  EXPECT_EQ(rep.strategies[0].runs[0].final_chi, direct.final_chi);
  EXPECT_EQ(rep.strategies[0].runs[0].final_p, direct.final_p);
  EXPECT_EQ(rep.strategies[0].mean_chi.back(), direct.final_chi);
  EXPECT_EQ(rep.strategies[0].t.size(), 21u);
}

TEST(GaBench, ProducesOneRowPerCell) {
  const Scenario sc = paper(1, 10);
  const auto cells = ga_bench(sc, {6, 8}, {2, 4, 6}, 3, 1);
  ASSERT_EQ(cells.size(), 6u);
  for (const auto& c : cells) {
    EXPECT_EQ(c.decisions, 3u);
    EXPECT_GT(c.mean_ms, 0.0);
    EXPECT_GE(c.max_ms, c.mean_ms);
  }
  EXPECT_EQ(ga_bench(sc, {6}, {2}, 2, 1).size(), 1u);
}
