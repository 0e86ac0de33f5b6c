#include "habcov/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace habcov {

namespace {
constexpr double kStepSeconds = 60.0;
}

VerticalRateModel vertical_rate_model(Action action) {
  switch (action) {
    case Action::kAscend:
      return {1.80, 0.14};
    case Action::kMaintain:
      return {0.00, 1.25};
    case Action::kDescend:
      return {-2.80, 0.30};
  }
  throw std::invalid_argument("invalid action");
}

AgentState step_agent_with_rate(const AgentState& state, double rate_mps,
                                const WindModel& truth, double t_min) {
  WindSample wind =
      sample_wind(truth, state.x_km, state.y_km, state.altitude_m, t_min);
  AgentState next = state;
  next.altitude_m = std::clamp(state.altitude_m + rate_mps * kStepSeconds,
                               kAltMinM, kAltMaxM);
  double u, v;
  bearing_to_uv(wind.bearing_rad, wind.speed_mps, u, v);
  next.x_km = state.x_km + u * kStepSeconds / 1000.0;
  next.y_km = state.y_km + v * kStepSeconds / 1000.0;
  return next;
}

AgentState step_agent(const AgentState& state, Action action,
                      const WindModel& truth, double t_min, Rng& rng) {
  VerticalRateModel m = vertical_rate_model(action);
  double rate = rng.normal(m.mean_mps, m.sd_mps);
  return step_agent_with_rate(state, rate, truth, t_min);
}

bool within_coverage(const AgentState& state, double r_coverage_km) {
  if (!(r_coverage_km > 0.0)) {
    throw std::invalid_argument("r_coverage must be positive");
  }
  return std::hypot(state.x_km, state.y_km) <= r_coverage_km;
}

}  // namespace habcov
