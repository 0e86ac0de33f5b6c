#pragma once

#include <string>
#include <vector>

#include "habcov/environment.hpp"
#include "habcov/trace.hpp"

namespace habcov {

// Gridded visit-count field over [-half_extent, half_extent]^2 km.
struct Heatmap {
  double origin_km = -200.0;
  double cell_km = 5.0;
  int width = 80;
  int height = 80;
  std::vector<int> counts;  // iy * width + ix

  int& at(int ix, int iy) { return counts[static_cast<std::size_t>(iy) * width + ix]; }
  int at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * width + ix]; }
  double center_x(int ix) const { return origin_km + (ix + 0.5) * cell_km; }
  double center_y(int iy) const { return origin_km + (iy + 0.5) * cell_km; }
};

struct HeatmapOptions {
  double ground_radius_km = 50.0;
  double cell_km = 5.0;
  double half_extent_km = 200.0;
  int cap = 2880;  // per-cell cap; the episode length
};

// Group heatmap: each step adds one count per covering agent, final counts
// capped at the episode length for cross-team comparability.
Heatmap accumulate_heatmap(const EpisodeTrace& trace, const HeatmapOptions& opt);
std::vector<Heatmap> per_agent_heatmaps(const EpisodeTrace& trace,
                                        const HeatmapOptions& opt);

struct TwrResult {
  std::vector<double> per_agent;
  double group = 0.0;
};

TwrResult compute_twr(const EpisodeTrace& trace, double r_coverage_km);

enum class SeparationNorm { kTrain, kEval };

// Mean over all steps of the pairwise inside-agent separation ratio; steps
// with fewer than two agents inside contribute zero. Train normalization is
// the reward's dispersion term; eval divides by the coverage diameter.
double compute_separation(const EpisodeTrace& trace, SeparationNorm norm,
                          double r_coverage_km);

struct CoverageStats {
  double percent_area_coverage = 0.0;
  double mean_coverage_over_time = 0.0;
  double mean_area_per_agent = 0.0;
};

// Binary-coverage statistics restricted to cells whose centers lie inside the
// coverage disc; over-time value is the time average of the instantaneous
// covered fraction.
CoverageStats coverage_statistics(const EpisodeTrace& trace,
                                  const HeatmapOptions& opt,
                                  double disc_radius_km);

struct EpisodeMetrics {
  std::uint64_t seed = 0;
  double mean_group_twr = 0.0;
  double mean_separation_ratio = 0.0;  // eval normalization (diameter)
  double percent_area_coverage = 0.0;
  double mean_area_per_agent = 0.0;
  double mean_coverage_over_time = 0.0;
  double episode_return = 0.0;
};

EpisodeMetrics episode_metrics(const EpisodeTrace& trace);

void save_heatmap(const Heatmap& hm, const std::string& path);
Heatmap load_heatmap(const std::string& path);

std::string episode_metrics_csv_header();
std::string episode_metrics_csv_row(const EpisodeMetrics& m);
std::vector<EpisodeMetrics> load_metrics_csv(const std::string& path);

}  // namespace habcov
