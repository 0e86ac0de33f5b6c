#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "habcov/environment.hpp"

namespace habcov {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct DiscPartition {
  std::vector<Point2> seeds;      // positions after the final iteration
  std::vector<Point2> centroids;  // centroid of each seed's cell
  int iterations = 0;
  double disc_radius_km = 0.0;
};

struct BaselineConfig {
  int lloyd_iterations = 20;
  double grid_km = 2.0;
  int refresh_minutes = 15;
  double v_cap_mps = 20.0;      // speed discount saturation for level scoring
  double deadband_m = 250.0;
  double arrival_km = 1.0;
};

// Rasterized Lloyd's relaxation constrained to a disc: grid points inside the
// disc are assigned to the nearest seed (ties to the lowest index), seeds move
// to their cell centroids each iteration. Empty-cell seeds re-project to the
// nearest point on the disc boundary.
DiscPartition lloyd_relax(const std::vector<Point2>& seeds,
                          double disc_radius_km, int iterations,
                          double grid_km);

// Quantization energy of a seed set over the disc grid: sum of squared
// distances from each grid point to its nearest seed.
double quantization_energy(const std::vector<Point2>& seeds,
                           double disc_radius_km, double grid_km);

struct WaypointAssignment {
  std::vector<Point2> targets;
  double t_refreshed_min = 0.0;
};

// Waypoints are the centroids of the cells seeded at the agents' current
// positions; agent i keeps the cell its own position generated.
WaypointAssignment assign_waypoints(const std::vector<AgentState>& states,
                                    double disc_radius_km, double t_min,
                                    const BaselineConfig& cfg);

// Picks the altitude level whose forecast wind best drifts toward the
// waypoint (speed-discounted cosine score) and moves toward it.
Action greedy_altitude_action(const AgentState& state, const Point2& waypoint,
                              const WindModel& forecast, double t_min,
                              int n_levels, const BaselineConfig& cfg);

struct BaselineEpisode {
  EpisodeTrace trace;
  // One row per refresh: (t, agent_id, waypoint_x, waypoint_y).
  std::vector<std::tuple<int, int, double, double>> waypoint_log;
};

BaselineEpisode run_baseline_episode(const EnvConfig& env_cfg,
                                     std::uint64_t seed,
                                     const BaselineConfig& cfg = {});

void save_waypoint_log(
    const std::vector<std::tuple<int, int, double, double>>& log,
    const std::string& path);

}  // namespace habcov
