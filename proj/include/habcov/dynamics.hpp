#pragma once

#include <cstdint>

#include "habcov/rng.hpp"
#include "habcov/wind.hpp"

namespace habcov {

enum class Action : int { kAscend = 0, kMaintain = 1, kDescend = 2 };
constexpr int kNumActions = 3;

struct AgentState {
  int agent_id = 0;
  double x_km = 0.0;  // east of coverage center
  double y_km = 0.0;  // north of coverage center
  double altitude_m = 20000.0;
};

struct VerticalRateModel {
  double mean_mps = 0.0;
  double sd_mps = 0.0;
};

// Per-action vertical rate distributions (m/s).
VerticalRateModel vertical_rate_model(Action action);

// Deterministic core of the step: apply a known vertical rate and advect by
// the truth wind at the pre-step position. One step is 60 s.
AgentState step_agent_with_rate(const AgentState& state, double rate_mps,
                                const WindModel& truth, double t_min);

// Stochastic step: draws the vertical rate from the action's distribution
// using the agent's episode-scoped stream.
AgentState step_agent(const AgentState& state, Action action,
                      const WindModel& truth, double t_min, Rng& rng);

bool within_coverage(const AgentState& state, double r_coverage_km);

}  // namespace habcov
