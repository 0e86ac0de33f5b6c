#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "habcov/dynamics.hpp"
#include "habcov/trace.hpp"
#include "habcov/wind.hpp"

namespace habcov {

struct EnvConfig {
  int n_agents = 3;
  int n_levels = 37;
  double r_coverage_km = 150.0;
  int episode_steps = 2880;
  double coverage_weight = 10.0;
  double dispersion_weight = 3.0;
  WindSpec wind;

  int obs_dim() const { return 6 + 3 * n_levels + 5 * (n_agents - 1); }
  int state_dim() const { return n_agents * (6 + 3 * n_levels) + 4; }
  double v_max() const { return wind.v_max; }
  double d_target_km() const { return r_coverage_km / std::sqrt(n_agents); }

  void validate() const;
  std::map<std::string, std::string> to_kv() const;
  static EnvConfig from_kv(const std::map<std::string, std::string>& kv);
};

struct RewardBreakdown {
  double team_reward = 0.0;
  double coverage_ratio = 0.0;
  double dispersion = 0.0;
};

RewardBreakdown compute_reward(const std::vector<AgentState>& states,
                               const EnvConfig& cfg);

std::vector<double> build_observation(int agent_id,
                                      const std::vector<AgentState>& states,
                                      const WindModel& forecast, double t_min,
                                      const EnvConfig& cfg);
std::vector<double> build_global_state(const std::vector<AgentState>& states,
                                       const WindModel& forecast, double t_min,
                                       const EnvConfig& cfg);

struct StepResult {
  std::vector<std::vector<double>> observations;
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;       // time limit reached
  bool truncated = false;  // wind data exhausted before the time limit
  double coverage_ratio = 0.0;
  double dispersion = 0.0;
};

// Parallel multi-agent episode engine. Agents move by the truth model; all
// observations and the global state are built from the forecast model.
class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  struct ResetResult {
    std::vector<std::vector<double>> observations;
    std::vector<double> state;
  };

  ResetResult reset(std::uint64_t episode_seed);
  StepResult step(const std::vector<Action>& joint_action);

  const EnvConfig& config() const { return cfg_; }
  const std::vector<AgentState>& states() const { return states_; }
  const WindModel& truth() const { return *truth_; }
  const WindModel& forecast() const { return *forecast_; }
  int t() const { return t_; }
  bool done() const { return done_; }
  const EpisodeTrace& trace() const { return trace_; }

 private:
  EnvConfig cfg_;
  std::shared_ptr<const WindModel> truth_;
  std::shared_ptr<const WindModel> forecast_;
  std::vector<AgentState> states_;
  std::vector<Rng> vertical_streams_;
  int t_ = 0;
  bool started_ = false;
  bool done_ = false;
  EpisodeTrace trace_;
};

struct ReplayMismatch {
  int step = 0;  // 0 = init
  int agent_id = -1;
  std::string field;
  double expected = 0.0;
  double actual = 0.0;
};

struct ReplayResult {
  bool ok = true;
  std::vector<ReplayMismatch> mismatches;
};

// Re-simulates a trace from its embedded config/seed by applying the recorded
// actions and compares every recorded value bit-for-bit.
ReplayResult verify_replay(const EpisodeTrace& trace);

}  // namespace habcov
