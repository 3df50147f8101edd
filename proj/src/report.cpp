#include "coopsearch/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>

#include "coopsearch/errors.hpp"

namespace coopsearch {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string num(double v) { return format_number(v); }

}  // namespace

void write_metrics_csv(std::ostream& out, const RunResult& r) {
  out << "t,global_chi,global_p,targets_found,links,contacts";
  for (int id : r.uav_ids) out << ",chi_" << id << ",p_" << id << ",length_" << id << ",alive_" << id;
  out << '\n';
  for (const auto& f : r.metrics) {
    out << num(f.t) << ',' << num(f.global_chi) << ',' << num(f.global_p) << ',' << f.targets_found << ',' << f.links
        << ',' << f.contacts;
    for (std::size_t i = 0; i < f.uav_chi.size(); ++i) {
      out << ',' << num(f.uav_chi[i]) << ',' << num(f.uav_p[i]) << ',' << num(f.uav_length[i]) << ','
          << static_cast<int>(f.uav_alive[i]);
    }
    out << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const RunResult& r) {
  out << "uav,t,x,y,heading,j,u\n";
  for (const auto& row : r.trajectory) {
    out << row.uav << ',' << num(row.t) << ',' << num(row.x) << ',' << num(row.y) << ',' << num(row.heading) << ','
        << row.j << ',' << row.u << '\n';
  }
}

void write_events_csv(std::ostream& out, const RunResult& r) {
  out << "t,kind,uav,detail\n";
  for (const auto& e : r.events) out << num(e.t) << ',' << e.kind << ',' << e.uav << ',' << e.detail << '\n';
}

void write_links_csv(std::ostream& out, const RunResult& r) {
  out << "t,a,b\n";
  for (const auto& l : r.links) out << num(l.t) << ',' << l.a << ',' << l.b << '\n';
}

void write_decisions_csv(std::ostream& out, const RunResult& r) {
  out << "t,uav,j_requested,j_used,m,generations,evaluations,best,min,max,u,emergency,wall_ms\n";
  for (const auto& d : r.decisions) {
    out << num(d.t) << ',' << d.uav << ',' << d.diag.j_requested << ',' << d.diag.j_used << ',' << d.diag.m << ','
        << d.diag.generations << ',' << d.diag.evaluations << ',' << num(d.diag.best) << ',' << num(d.diag.min) << ','
        << num(d.diag.max) << ',' << d.u << ',' << (d.emergency ? 1 : 0) << ',' << num(d.diag.wall_ms) << '\n';
  }
}

void write_expert_csv(std::ostream& out, const RunResult& r) {
  out << "t,uav,e1,e2,j,m,kw1,kw2,kw3\n";
  for (const auto& e : r.expert) {
    out << num(e.t) << ',' << e.uav << ',' << num(e.out.e1) << ',' << num(e.out.e2) << ',' << e.out.j << ','
        << e.out.m << ',' << num(e.out.kw1) << ',' << num(e.out.kw2) << ',' << num(e.out.kw3) << '\n';
  }
}

void write_contacts_csv(std::ostream& out, const RunResult& r) {
  out << "t,receiver,poses,cells,chi_before,chi_after,chi_drop\n";
  for (const auto& c : r.contacts) {
    out << num(c.t) << ',' << c.receiver << ',' << c.poses << ',' << c.cells << ',' << num(c.chi_before) << ','
        << num(c.chi_after) << ',' << num(c.chi_drop) << '\n';
  }
}

void write_layer_csv(std::ostream& out, const SearchMap& map, Layer layer) {
  const GridSpec& g = map.grid();
  for (int y = 1; y <= g.wy; ++y) {
    for (int x = 1; x <= g.lx; ++x) {
      const std::size_t idx = g.index({x, y});
      if (x > 1) out << ',';
      switch (layer) {
        case Layer::kP:
          out << num(map.p(idx));
          break;
        case Layer::kChi:
          out << num(map.chi(idx));
          break;
        case Layer::kFound:
          out << (map.found(idx) ? 1 : 0);
          break;
      }
    }
    out << '\n';
  }
}

void write_trajectory_svg(std::ostream& out, const Scenario& sc, const RunResult& r) {
  static constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                          "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
  const double w = sc.grid.width();
  const double h = sc.grid.height();
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-10 -10 " << num(w + 20) << ' ' << num(h + 20)
      << "\" width=\"" << num(w + 20) << "\" height=\"" << num(h + 20) << "\">\n";
  // Flip y so the origin sits bottom-left as in the map frame.
  out << "<g transform=\"translate(0," << num(h) << ") scale(1,-1)\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";
  for (const auto& a : r.denied_initial) {
    if (a.shape == DeniedArea::Shape::kCircle) {
      out << "<circle cx=\"" << num(a.center.x) << "\" cy=\"" << num(a.center.y) << "\" r=\"" << num(a.radius)
          << "\" fill=\"#bbbbbb\" stroke=\"#555555\"/>\n";
    } else {
      out << "<polygon points=\"";
      for (const auto& v : a.vertices) out << num(v.x) << ',' << num(v.y) << ' ';
      out << "\" fill=\"#bbbbbb\" stroke=\"#555555\"/>\n";
    }
  }
  for (const auto& t : r.targets) {
    out << "<circle cx=\"" << num(t.prior.x) << "\" cy=\"" << num(t.prior.y) << "\" r=\"" << num(t.width)
        << "\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
    out << "<circle cx=\"" << num(t.truth.x) << "\" cy=\"" << num(t.truth.y) << "\" r=\"6\" fill=\""
        << (t.discovered ? "#000000" : "none") << "\" stroke=\"#000000\"/>\n";
  }
  std::map<int, std::vector<const TrajectoryRow*>> tracks;
  for (const auto& row : r.trajectory) tracks[row.uav].push_back(&row);
  std::size_t k = 0;
  for (const auto& [id, rows] : tracks) {
    const char* color = kColors[k++ % kColors.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto* row : rows) out << num(row->x) << ',' << num(row->y) << ' ';
    out << "\"/>\n";
    out << "<circle cx=\"" << num(rows.front()->x) << "\" cy=\"" << num(rows.front()->y) << "\" r=\"5\" fill=\""
        << color << "\"/>\n";
  }
  out << "</g>\n";
  k = 0;
  for (const auto& [id, rows] : tracks) {
    out << "<text x=\"" << num(8.0) << "\" y=\"" << num(14.0 + 14.0 * static_cast<double>(k)) << "\" fill=\""
        << kColors[k % kColors.size()] << "\" font-size=\"12\">UAV " << id << "</text>\n";
    ++k;
  }
  out << "</svg>\n";
}

void write_compare_curves_csv(std::ostream& out, const CompareReport& rep) {
  out << "t";
  for (const auto& s : rep.strategies) out << ",mean_chi_s" << s.strategy << ",mean_p_s" << s.strategy;
  out << '\n';
  if (rep.strategies.empty()) return;
  const std::size_t n = rep.strategies.front().t.size();
  for (std::size_t i = 0; i < n; ++i) {
    out << num(rep.strategies.front().t[i]);
    for (const auto& s : rep.strategies) {
      out << ',' << (i < s.mean_chi.size() ? num(s.mean_chi[i]) : "") << ','
          << (i < s.mean_p.size() ? num(s.mean_p[i]) : "");
    }
    out << '\n';
  }
}

void write_compare_summary_csv(std::ostream& out, const CompareReport& rep) {
  out << "strategy,seed,final_chi,final_p,targets_found,all_found_at,contact_epochs,emergencies,violations,"
         "mean_decision_ms\n";
  for (const auto& s : rep.strategies) {
    for (const auto& r : s.runs) {
      out << r.strategy << ',' << r.seed << ',' << num(r.final_chi) << ',' << num(r.final_p) << ',' << r.targets_found
          << ',' << num(r.all_found_at) << ',' << r.contact_epochs << ',' << r.emergencies << ',' << r.violations
          << ',' << num(r.mean_decision_ms) << '\n';
    }
  }
}

void write_ga_bench_csv(std::ostream& out, const std::vector<GaBenchCell>& cells) {
  out << "m,j,decisions,mean_ms,max_ms,mean_generations,mean_evaluations,mean_j_used,emergencies\n";
  for (const auto& c : cells) {
    out << c.m << ',' << c.j << ',' << c.decisions << ',' << num(c.mean_ms) << ',' << num(c.max_ms) << ','
        << num(c.mean_generations) << ',' << num(c.mean_evaluations) << ',' << num(c.mean_j_used) << ','
        << c.emergencies << '\n';
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<std::filesystem::path> write_run_artifacts(const std::filesystem::path& dir, const Scenario& sc,
                                                       const RunResult& r) {
  std::vector<std::filesystem::path> files;
  auto emit = [&](const char* name, auto&& writer) {
    const auto path = dir / name;
    std::ofstream out = open_output(path);
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
    files.push_back(path);
  };
  emit("metrics.csv", [&](std::ostream& o) { write_metrics_csv(o, r); });
  emit("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, r); });
  emit("events.csv", [&](std::ostream& o) { write_events_csv(o, r); });
  emit("links.csv", [&](std::ostream& o) { write_links_csv(o, r); });
  emit("decisions.csv", [&](std::ostream& o) { write_decisions_csv(o, r); });
  emit("expert.csv", [&](std::ostream& o) { write_expert_csv(o, r); });
  emit("contacts.csv", [&](std::ostream& o) { write_contacts_csv(o, r); });
  emit("trajectory.svg", [&](std::ostream& o) { write_trajectory_svg(o, sc, r); });
  return files;
}

}  // namespace coopsearch
