#include "habcov/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace habcov {

namespace {

std::vector<Point2> disc_grid(double radius_km, double grid_km) {
  std::vector<Point2> pts;
  const int n = static_cast<int>(std::ceil(2.0 * radius_km / grid_km));
  const double r2 = radius_km * radius_km;
  for (int iy = 0; iy < n; ++iy) {
    double y = -radius_km + (iy + 0.5) * grid_km;
    for (int ix = 0; ix < n; ++ix) {
      double x = -radius_km + (ix + 0.5) * grid_km;
      if (x * x + y * y <= r2) pts.push_back({x, y});
    }
  }
  return pts;
}

std::size_t nearest_seed(const std::vector<Point2>& seeds, const Point2& p) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    double dx = p.x - seeds[i].x, dy = p.y - seeds[i].y;
    double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {  // ties resolve to the lowest index
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

Point2 project_to_boundary(const Point2& p, double radius_km) {
  double n = std::hypot(p.x, p.y);
  if (n < 1e-12) return {radius_km, 0.0};
  return {p.x * radius_km / n, p.y * radius_km / n};
}

}  // namespace

DiscPartition lloyd_relax(const std::vector<Point2>& seeds,
                          double disc_radius_km, int iterations,
                          double grid_km) {
  if (seeds.empty()) throw std::invalid_argument("lloyd_relax: no seeds");
  const std::vector<Point2> grid = disc_grid(disc_radius_km, grid_km);
  std::vector<Point2> cur = seeds;
  std::vector<Point2> centroids = cur;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> sx(cur.size(), 0.0), sy(cur.size(), 0.0);
    std::vector<std::size_t> cnt(cur.size(), 0);
    for (const Point2& p : grid) {
      std::size_t k = nearest_seed(cur, p);
      sx[k] += p.x;
      sy[k] += p.y;
      ++cnt[k];
    }
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cnt[i] == 0) {
        centroids[i] = project_to_boundary(cur[i], disc_radius_km);
      } else {
        centroids[i] = {sx[i] / cnt[i], sy[i] / cnt[i]};
      }
    }
    cur = centroids;
  }
  DiscPartition out;
  out.seeds = cur;
  out.centroids = centroids;
  out.iterations = iterations;
  out.disc_radius_km = disc_radius_km;
  return out;
}

double quantization_energy(const std::vector<Point2>& seeds,
                           double disc_radius_km, double grid_km) {
  if (seeds.empty()) throw std::invalid_argument("quantization_energy: no seeds");
  double e = 0.0;
  for (const Point2& p : disc_grid(disc_radius_km, grid_km)) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point2& s : seeds) {
      double dx = p.x - s.x, dy = p.y - s.y;
      best = std::min(best, dx * dx + dy * dy);
    }
    e += best;
  }
  return e;
}

WaypointAssignment assign_waypoints(const std::vector<AgentState>& states,
                                    double disc_radius_km, double t_min,
                                    const BaselineConfig& cfg) {
  std::vector<Point2> seeds;
  seeds.reserve(states.size());
  for (const auto& s : states) seeds.push_back({s.x_km, s.y_km});
  DiscPartition part =
      lloyd_relax(seeds, disc_radius_km, cfg.lloyd_iterations, cfg.grid_km);
  // Lloyd's moves seeds; agent i's waypoint is the converged centroid of the
  // chain its own position started, i.e. index i.
  WaypointAssignment out;
  out.targets = part.centroids;
  out.t_refreshed_min = t_min;
  return out;
}

Action greedy_altitude_action(const AgentState& state, const Point2& waypoint,
                              const WindModel& forecast, double t_min,
                              int n_levels, const BaselineConfig& cfg) {
  double to_x = waypoint.x - state.x_km;
  double to_y = waypoint.y - state.y_km;
  double dist = std::hypot(to_x, to_y);
  if (dist < cfg.arrival_km) return Action::kMaintain;
  to_x /= dist;
  to_y /= dist;

  WindColumn col =
      sample_column(forecast, state.x_km, state.y_km, t_min, n_levels);
  double best_score = -std::numeric_limits<double>::infinity();
  double best_alt = state.altitude_m;
  for (const auto& lvl : col.levels) {
    double score = 0.0;
    if (lvl.wind.speed_mps > 1e-9) {
      double u, v;
      bearing_to_uv(lvl.wind.bearing_rad, lvl.wind.speed_mps, u, v);
      double cosine = (u * to_x + v * to_y) / lvl.wind.speed_mps;
      score = cosine * std::min(lvl.wind.speed_mps, cfg.v_cap_mps) / cfg.v_cap_mps;
    }
    bool better = score > best_score;
    if (!better && score == best_score) {
      double d_new = std::abs(lvl.altitude_m - state.altitude_m);
      double d_best = std::abs(best_alt - state.altitude_m);
      better = d_new < d_best || (d_new == d_best && lvl.altitude_m < best_alt);
    }
    if (better) {
      best_score = score;
      best_alt = lvl.altitude_m;
    }
  }
  if (best_alt > state.altitude_m + cfg.deadband_m) return Action::kAscend;
  if (best_alt < state.altitude_m - cfg.deadband_m) return Action::kDescend;
  return Action::kMaintain;
}

BaselineEpisode run_baseline_episode(const EnvConfig& env_cfg,
                                     std::uint64_t seed,
                                     const BaselineConfig& cfg) {
  Environment env(env_cfg);
  env.reset(seed);
  BaselineEpisode out;
  WaypointAssignment wp;
  bool done = false;
  while (!done) {
    double t = static_cast<double>(env.t());
    if (env.t() % cfg.refresh_minutes == 0 || wp.targets.empty()) {
      wp = assign_waypoints(env.states(), env_cfg.r_coverage_km, t, cfg);
      for (int i = 0; i < env_cfg.n_agents; ++i) {
        out.waypoint_log.emplace_back(env.t(), i, wp.targets[i].x,
                                      wp.targets[i].y);
      }
    }
    std::vector<Action> joint;
    joint.reserve(static_cast<std::size_t>(env_cfg.n_agents));
    for (int i = 0; i < env_cfg.n_agents; ++i) {
      joint.push_back(greedy_altitude_action(env.states()[i], wp.targets[i],
                                             env.forecast(), t,
                                             env_cfg.n_levels, cfg));
    }
    done = env.step(joint).done;
  }
  out.trace = env.trace();
  return out;
}

void save_waypoint_log(
    const std::vector<std::tuple<int, int, double, double>>& log,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open waypoint log for write: " + path);
  out << "t,agent_id,waypoint_x,waypoint_y\n";
  out.precision(17);
  for (const auto& [t, id, x, y] : log) {
    out << t << ',' << id << ',' << x << ',' << y << '\n';
  }
}

}  // namespace habcov
