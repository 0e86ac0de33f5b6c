#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "habcov/dynamics.hpp"

namespace habcov {

class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One environment step: post-step kinematics per agent, the action that
// produced them, and the team metrics computed from the post-step states.
struct TraceStep {
  int t = 0;  // 1-based step index
  std::vector<double> x_km;
  std::vector<double> y_km;
  std::vector<double> alt_m;
  std::vector<int> action;
  double reward = 0.0;
  double coverage_ratio = 0.0;
  double separation = 0.0;  // Eq-style dispersion term (train normalization)
};

struct EpisodeTrace {
  std::map<std::string, std::string> config_kv;
  std::uint64_t seed = 0;
  int n_agents = 0;
  std::vector<AgentState> init;
  std::vector<TraceStep> steps;
  bool truncated = false;

  double episode_return() const;

  void save(const std::string& path) const;
  static EpisodeTrace load(const std::string& path);
  // Long-form CSV mirror: one row per (step, agent).
  void save_csv(const std::string& path) const;
};

}  // namespace habcov
