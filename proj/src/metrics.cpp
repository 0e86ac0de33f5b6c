#include "habcov/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace habcov {

namespace {

Heatmap make_grid(const HeatmapOptions& opt) {
  Heatmap hm;
  hm.cell_km = opt.cell_km;
  hm.origin_km = -opt.half_extent_km;
  hm.width = static_cast<int>(std::lround(2.0 * opt.half_extent_km / opt.cell_km));
  hm.height = hm.width;
  hm.counts.assign(static_cast<std::size_t>(hm.width) * hm.height, 0);
  return hm;
}

// Visits every cell whose center lies within radius of (x, y).
template <typename Fn>
void for_covered_cells(const Heatmap& hm, double x, double y, double radius,
                       Fn&& fn) {
  int ix_lo = std::max(0, static_cast<int>(std::floor((x - radius - hm.origin_km) / hm.cell_km)));
  int ix_hi = std::min(hm.width - 1, static_cast<int>(std::ceil((x + radius - hm.origin_km) / hm.cell_km)));
  int iy_lo = std::max(0, static_cast<int>(std::floor((y - radius - hm.origin_km) / hm.cell_km)));
  int iy_hi = std::min(hm.height - 1, static_cast<int>(std::ceil((y + radius - hm.origin_km) / hm.cell_km)));
  const double r2 = radius * radius;
  for (int iy = iy_lo; iy <= iy_hi; ++iy) {
    double dy = hm.center_y(iy) - y;
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      double dx = hm.center_x(ix) - x;
      if (dx * dx + dy * dy <= r2) fn(ix, iy);
    }
  }
}

void require_steps(const EpisodeTrace& trace, const char* op) {
  if (trace.steps.empty()) {
    throw std::invalid_argument(std::string(op) + ": trace has no steps");
  }
}

}  // namespace

Heatmap accumulate_heatmap(const EpisodeTrace& trace, const HeatmapOptions& opt) {
  Heatmap hm = make_grid(opt);
  for (const auto& st : trace.steps) {
    for (int i = 0; i < trace.n_agents; ++i) {
      for_covered_cells(hm, st.x_km[i], st.y_km[i], opt.ground_radius_km,
                        [&](int ix, int iy) { hm.at(ix, iy) += 1; });
    }
  }
  for (auto& c : hm.counts) c = std::min(c, opt.cap);
  return hm;
}

std::vector<Heatmap> per_agent_heatmaps(const EpisodeTrace& trace,
                                        const HeatmapOptions& opt) {
  std::vector<Heatmap> maps(static_cast<std::size_t>(trace.n_agents),
                            make_grid(opt));
  for (const auto& st : trace.steps) {
    for (int i = 0; i < trace.n_agents; ++i) {
      for_covered_cells(maps[i], st.x_km[i], st.y_km[i], opt.ground_radius_km,
                        [&](int ix, int iy) { maps[i].at(ix, iy) += 1; });
    }
  }
  for (auto& m : maps) {
    for (auto& c : m.counts) c = std::min(c, opt.cap);
  }
  return maps;
}

TwrResult compute_twr(const EpisodeTrace& trace, double r_coverage_km) {
  require_steps(trace, "compute_twr");
  TwrResult res;
  res.per_agent.assign(static_cast<std::size_t>(trace.n_agents), 0.0);
  for (const auto& st : trace.steps) {
    for (int i = 0; i < trace.n_agents; ++i) {
      if (std::hypot(st.x_km[i], st.y_km[i]) <= r_coverage_km) {
        res.per_agent[i] += 1.0;
      }
    }
  }
  const double n_steps = static_cast<double>(trace.steps.size());
  for (auto& v : res.per_agent) v /= n_steps;
  for (double v : res.per_agent) res.group += v;
  res.group /= trace.n_agents;
  return res;
}

double compute_separation(const EpisodeTrace& trace, SeparationNorm norm,
                          double r_coverage_km) {
  require_steps(trace, "compute_separation");
  const double d_target = norm == SeparationNorm::kTrain
                              ? r_coverage_km / std::sqrt(trace.n_agents)
                              : 2.0 * r_coverage_km;
  double sum = 0.0;
  for (const auto& st : trace.steps) {
    std::vector<int> inside;
    for (int i = 0; i < trace.n_agents; ++i) {
      if (std::hypot(st.x_km[i], st.y_km[i]) <= r_coverage_km) inside.push_back(i);
    }
    if (inside.size() < 2) continue;
    double d = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < inside.size(); ++a) {
      for (std::size_t b = a + 1; b < inside.size(); ++b) {
        d += std::hypot(st.x_km[inside[a]] - st.x_km[inside[b]],
                        st.y_km[inside[a]] - st.y_km[inside[b]]);
        ++pairs;
      }
    }
    double ratio = (d / pairs) / d_target;
    if (norm == SeparationNorm::kTrain) ratio = std::min(ratio, 1.0);
    sum += ratio;
  }
  return sum / static_cast<double>(trace.steps.size());
}

CoverageStats coverage_statistics(const EpisodeTrace& trace,
                                  const HeatmapOptions& opt,
                                  double disc_radius_km) {
  require_steps(trace, "coverage_statistics");
  Heatmap grid = make_grid(opt);
  const double disc_r2 = disc_radius_km * disc_radius_km;
  std::vector<char> in_disc(grid.counts.size(), 0);
  std::size_t disc_cells = 0;
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      double cx = grid.center_x(ix), cy = grid.center_y(iy);
      if (cx * cx + cy * cy <= disc_r2) {
        in_disc[static_cast<std::size_t>(iy) * grid.width + ix] = 1;
        ++disc_cells;
      }
    }
  }
  if (disc_cells == 0) return {};

  std::vector<int> group_count(grid.counts.size(), 0);
  std::vector<std::vector<char>> agent_any(
      static_cast<std::size_t>(trace.n_agents),
      std::vector<char>(grid.counts.size(), 0));
  std::vector<int> stamp(grid.counts.size(), -1);
  double over_time_sum = 0.0;
  for (std::size_t ti = 0; ti < trace.steps.size(); ++ti) {
    const auto& st = trace.steps[ti];
    std::size_t step_covered = 0;
    for (int i = 0; i < trace.n_agents; ++i) {
      for_covered_cells(grid, st.x_km[i], st.y_km[i], opt.ground_radius_km,
                        [&](int ix, int iy) {
                          std::size_t k = static_cast<std::size_t>(iy) * grid.width + ix;
                          group_count[k] += 1;
                          agent_any[i][k] = 1;
                          if (in_disc[k] && stamp[k] != static_cast<int>(ti)) {
                            stamp[k] = static_cast<int>(ti);
                            ++step_covered;
                          }
                        });
    }
    over_time_sum += static_cast<double>(step_covered) / disc_cells;
  }

  CoverageStats out;
  std::size_t covered = 0;
  for (std::size_t k = 0; k < group_count.size(); ++k) {
    if (in_disc[k] && group_count[k] > 0) ++covered;
  }
  out.percent_area_coverage = static_cast<double>(covered) / disc_cells;
  out.mean_coverage_over_time = over_time_sum / static_cast<double>(trace.steps.size());
  double per_agent_sum = 0.0;
  for (int i = 0; i < trace.n_agents; ++i) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < group_count.size(); ++k) {
      if (in_disc[k] && agent_any[i][k]) ++c;
    }
    per_agent_sum += static_cast<double>(c) / disc_cells;
  }
  out.mean_area_per_agent = per_agent_sum / trace.n_agents;
  return out;
}

EpisodeMetrics episode_metrics(const EpisodeTrace& trace) {
  EnvConfig cfg = EnvConfig::from_kv(trace.config_kv);
  HeatmapOptions opt;
  opt.cap = cfg.episode_steps;
  EpisodeMetrics m;
  m.seed = trace.seed;
  m.mean_group_twr = compute_twr(trace, cfg.r_coverage_km).group;
  m.mean_separation_ratio =
      compute_separation(trace, SeparationNorm::kEval, cfg.r_coverage_km);
  CoverageStats cs = coverage_statistics(trace, opt, cfg.r_coverage_km);
  m.percent_area_coverage = cs.percent_area_coverage;
  m.mean_area_per_agent = cs.mean_area_per_agent;
  m.mean_coverage_over_time = cs.mean_coverage_over_time;
  m.episode_return = trace.episode_return();
  return m;
}

void save_heatmap(const Heatmap& hm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open heatmap file for write: " + path);
  out << "habcov-heatmap v1\n";
  out.precision(17);
  out << "width " << hm.width << " height " << hm.height << " cell_km "
      << hm.cell_km << " origin_km " << hm.origin_km << '\n';
  for (int iy = 0; iy < hm.height; ++iy) {
    for (int ix = 0; ix < hm.width; ++ix) {
      if (ix) out << ' ';
      out << hm.at(ix, iy);
    }
    out << '\n';
  }
}

Heatmap load_heatmap(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open heatmap file: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "habcov-heatmap v1") throw std::runtime_error("bad heatmap magic");
  Heatmap hm;
  std::string w;
  in >> w >> hm.width >> w >> hm.height >> w >> hm.cell_km >> w >> hm.origin_km;
  hm.counts.resize(static_cast<std::size_t>(hm.width) * hm.height);
  for (auto& c : hm.counts) {
    if (!(in >> c)) throw std::runtime_error("truncated heatmap grid");
  }
  return hm;
}

std::string episode_metrics_csv_header() {
  return "seed,mean_group_twr,mean_separation_ratio,percent_area_coverage,"
         "mean_area_per_agent,mean_coverage_over_time,episode_return";
}

std::string episode_metrics_csv_row(const EpisodeMetrics& m) {
  std::ostringstream os;
  os.precision(17);
  os << m.seed << ',' << m.mean_group_twr << ',' << m.mean_separation_ratio
     << ',' << m.percent_area_coverage << ',' << m.mean_area_per_agent << ','
     << m.mean_coverage_over_time << ',' << m.episode_return;
  return os.str();
}

std::vector<EpisodeMetrics> load_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line != episode_metrics_csv_header()) {
    throw std::runtime_error("unexpected metrics csv header in " + path);
  }
  std::vector<EpisodeMetrics> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    EpisodeMetrics m;
    char c;
    if (!(is >> m.seed >> c >> m.mean_group_twr >> c >> m.mean_separation_ratio >>
          c >> m.percent_area_coverage >> c >> m.mean_area_per_agent >> c >>
          m.mean_coverage_over_time >> c >> m.episode_return)) {
      throw std::runtime_error("bad metrics csv row at line " +
                               std::to_string(line_no) + " in " + path);
    }
    rows.push_back(m);
  }
  return rows;
}

}  // namespace habcov
