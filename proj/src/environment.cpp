#include "habcov/environment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace habcov {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double alt_norm(double alt_m) { return (alt_m - kAltMinM) / (kAltMaxM - kAltMinM); }

double pos_norm(double coord_km, double r_km) {
  return clamp01((coord_km + r_km) / (2.0 * r_km));
}

double bearing_to_center(const AgentState& s) {
  double d = std::hypot(s.x_km, s.y_km);
  if (d < 1e-12) return 0.0;
  return wrap_bearing(std::atan2(-s.x_km, -s.y_km));
}

void append_wind_block(std::vector<double>& out, const WindColumn& col,
                       double v_max) {
  for (const auto& lvl : col.levels) {
    out.push_back(alt_norm(lvl.altitude_m));
    out.push_back(lvl.wind.bearing_rad / kTwoPi);
    out.push_back(clamp01(lvl.wind.speed_mps / v_max));
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void EnvConfig::validate() const {
  if (n_agents < 1) throw std::invalid_argument("n_agents must be >= 1");
  if (n_levels < 2) throw std::invalid_argument("n_levels must be >= 2");
  if (!(r_coverage_km > 0.0)) throw std::invalid_argument("r_coverage must be > 0");
  if (episode_steps < 1) throw std::invalid_argument("episode_steps must be >= 1");
  if (!(wind.v_max > 0.0)) throw std::invalid_argument("v_max must be > 0");
}

std::map<std::string, std::string> EnvConfig::to_kv() const {
  std::map<std::string, std::string> kv = wind.to_kv();
  kv["env.n_agents"] = std::to_string(n_agents);
  kv["env.n_levels"] = std::to_string(n_levels);
  kv["env.r_coverage"] = fmt(r_coverage_km);
  kv["env.episode_steps"] = std::to_string(episode_steps);
  kv["env.coverage_weight"] = fmt(coverage_weight);
  kv["env.dispersion_weight"] = fmt(dispersion_weight);
  return kv;
}

EnvConfig EnvConfig::from_kv(const std::map<std::string, std::string>& kv) {
  EnvConfig cfg;
  cfg.wind = WindSpec::from_kv(kv);
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("env.n_agents")) cfg.n_agents = std::stoi(*v);
  if (auto* v = get("env.n_levels")) cfg.n_levels = std::stoi(*v);
  if (auto* v = get("env.r_coverage")) cfg.r_coverage_km = std::stod(*v);
  if (auto* v = get("env.episode_steps")) cfg.episode_steps = std::stoi(*v);
  if (auto* v = get("env.coverage_weight")) cfg.coverage_weight = std::stod(*v);
  if (auto* v = get("env.dispersion_weight")) cfg.dispersion_weight = std::stod(*v);
  return cfg;
}

RewardBreakdown compute_reward(const std::vector<AgentState>& states,
                               const EnvConfig& cfg) {
  if (states.empty()) throw std::invalid_argument("compute_reward: no agents");
  std::vector<const AgentState*> inside;
  for (const auto& s : states) {
    if (within_coverage(s, cfg.r_coverage_km)) inside.push_back(&s);
  }
  RewardBreakdown r;
  r.coverage_ratio =
      static_cast<double>(inside.size()) / static_cast<double>(states.size());
  if (inside.size() >= 2) {
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < inside.size(); ++i) {
      for (std::size_t j = i + 1; j < inside.size(); ++j) {
        sum += std::hypot(inside[i]->x_km - inside[j]->x_km,
                          inside[i]->y_km - inside[j]->y_km);
        ++pairs;
      }
    }
    double mean_dist = sum / pairs;
    r.dispersion = std::min(mean_dist / cfg.d_target_km(), 1.0);
  }
  r.team_reward =
      cfg.coverage_weight * r.coverage_ratio + cfg.dispersion_weight * r.dispersion;
  return r;
}

std::vector<double> build_observation(int agent_id,
                                      const std::vector<AgentState>& states,
                                      const WindModel& forecast, double t_min,
                                      const EnvConfig& cfg) {
  const int n = static_cast<int>(states.size());
  if (agent_id < 0 || agent_id >= n) {
    throw std::invalid_argument("build_observation: bad agent_id");
  }
  const double r = cfg.r_coverage_km;
  const AgentState& self = states[agent_id];

  std::vector<double> obs;
  obs.reserve(static_cast<std::size_t>(cfg.obs_dim()));
  obs.push_back(alt_norm(self.altitude_m));
  obs.push_back(pos_norm(self.x_km, r));
  obs.push_back(pos_norm(self.y_km, r));
  obs.push_back(within_coverage(self, r) ? 1.0 : 0.0);
  obs.push_back(std::clamp(std::hypot(self.x_km, self.y_km) / r, 0.0, 2.0));
  obs.push_back(bearing_to_center(self) / kTwoPi);

  WindColumn col =
      sample_column(forecast, self.x_km, self.y_km, t_min, cfg.n_levels);
  append_wind_block(obs, col, cfg.v_max());

  for (int j = 0; j < n; ++j) {
    if (j == agent_id) continue;
    const AgentState& mate = states[j];
    obs.push_back(pos_norm(mate.x_km, r));
    obs.push_back(pos_norm(mate.y_km, r));
    double d = std::hypot(mate.x_km - self.x_km, mate.y_km - self.y_km);
    obs.push_back(clamp01(d / (2.0 * r)));
    obs.push_back(alt_norm(mate.altitude_m));
    obs.push_back(std::clamp(std::hypot(mate.x_km, mate.y_km) / r, 0.0, 2.0));
  }
  return obs;
}

std::vector<double> build_global_state(const std::vector<AgentState>& states,
                                       const WindModel& forecast, double t_min,
                                       const EnvConfig& cfg) {
  const double r = cfg.r_coverage_km;
  std::vector<double> st;
  st.reserve(static_cast<std::size_t>(cfg.state_dim()));
  for (const auto& s : states) {
    st.push_back(alt_norm(s.altitude_m));
    st.push_back(pos_norm(s.x_km, r));
    st.push_back(pos_norm(s.y_km, r));
    st.push_back(std::clamp(std::hypot(s.x_km, s.y_km) / r, 0.0, 2.0));
    st.push_back(within_coverage(s, r) ? 1.0 : 0.0);
    st.push_back(bearing_to_center(s) / kTwoPi);
    WindColumn col = sample_column(forecast, s.x_km, s.y_km, t_min, cfg.n_levels);
    append_wind_block(st, col, cfg.v_max());
  }
  // Shared goal: the coverage center, which is the frame origin.
  st.push_back(0.5);
  st.push_back(0.5);
  RewardBreakdown rb = compute_reward(states, cfg);
  st.push_back(rb.coverage_ratio);
  st.push_back(rb.dispersion);
  return st;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  truth_ = cfg_.wind.build_truth();
  forecast_ = cfg_.wind.build_forecast(truth_);
}

Environment::ResetResult Environment::reset(std::uint64_t episode_seed) {
  states_.clear();
  vertical_streams_.clear();
  const double r = cfg_.r_coverage_km;
  for (int i = 0; i < cfg_.n_agents; ++i) {
    Rng init = Rng::substream(episode_seed, static_cast<std::uint64_t>(i), 0,
                              StreamPurpose::kInit);
    AgentState s;
    s.agent_id = i;
    do {
      s.x_km = init.uniform(-r, r);
      s.y_km = init.uniform(-r, r);
    } while (!within_coverage(s, r));
    s.altitude_m = init.uniform(kAltMinM, kAltMaxM);
    states_.push_back(s);
    vertical_streams_.push_back(Rng::substream(
        episode_seed, static_cast<std::uint64_t>(i), 0, StreamPurpose::kVertical));
  }
  t_ = 0;
  started_ = true;
  done_ = false;

  trace_ = EpisodeTrace{};
  trace_.config_kv = cfg_.to_kv();
  trace_.seed = episode_seed;
  trace_.n_agents = cfg_.n_agents;
  trace_.init = states_;

  ResetResult out;
  for (int i = 0; i < cfg_.n_agents; ++i) {
    out.observations.push_back(
        build_observation(i, states_, *forecast_, 0.0, cfg_));
  }
  out.state = build_global_state(states_, *forecast_, 0.0, cfg_);
  return out;
}

StepResult Environment::step(const std::vector<Action>& joint_action) {
  if (!started_) throw std::logic_error("step called before reset");
  if (done_) throw std::logic_error("step called after episode end");
  if (static_cast<int>(joint_action.size()) != cfg_.n_agents) {
    throw std::invalid_argument("joint action size does not match n_agents");
  }
  const double t_pre = static_cast<double>(t_);
  for (int i = 0; i < cfg_.n_agents; ++i) {
    states_[i] = step_agent(states_[i], joint_action[i], *truth_, t_pre,
                            vertical_streams_[i]);
  }
  ++t_;

  RewardBreakdown rb = compute_reward(states_, cfg_);
  StepResult out;
  out.reward = rb.team_reward;
  out.coverage_ratio = rb.coverage_ratio;
  out.dispersion = rb.dispersion;
  out.done = t_ >= cfg_.episode_steps;
  if (auto horizon = truth_->time_horizon_min();
      horizon && static_cast<double>(t_) > *horizon) {
    out.done = true;
    out.truncated = true;
  }
  done_ = out.done;

  TraceStep ts;
  ts.t = t_;
  for (const auto& s : states_) {
    ts.x_km.push_back(s.x_km);
    ts.y_km.push_back(s.y_km);
    ts.alt_m.push_back(s.altitude_m);
  }
  for (Action a : joint_action) ts.action.push_back(static_cast<int>(a));
  ts.reward = rb.team_reward;
  ts.coverage_ratio = rb.coverage_ratio;
  ts.separation = rb.dispersion;
  trace_.steps.push_back(std::move(ts));
  trace_.truncated = out.truncated;

  const double t_now = static_cast<double>(t_);
  for (int i = 0; i < cfg_.n_agents; ++i) {
    out.observations.push_back(
        build_observation(i, states_, *forecast_, t_now, cfg_));
  }
  out.state = build_global_state(states_, *forecast_, t_now, cfg_);
  return out;
}

ReplayResult verify_replay(const EpisodeTrace& trace) {
  EnvConfig cfg = EnvConfig::from_kv(trace.config_kv);
  Environment env(cfg);
  env.reset(trace.seed);

  ReplayResult res;
  auto check = [&](int step, int agent, const char* field, double expected,
                   double actual) {
    if (expected != actual) {
      res.ok = false;
      res.mismatches.push_back({step, agent, field, expected, actual});
    }
  };

  for (int i = 0; i < cfg.n_agents; ++i) {
    check(0, i, "init.x", trace.init[i].x_km, env.states()[i].x_km);
    check(0, i, "init.y", trace.init[i].y_km, env.states()[i].y_km);
    check(0, i, "init.alt", trace.init[i].altitude_m, env.states()[i].altitude_m);
  }
  for (const auto& st : trace.steps) {
    if (!res.mismatches.empty() && res.mismatches.size() > 16) break;
    std::vector<Action> joint;
    for (int a : st.action) joint.push_back(static_cast<Action>(a));
    StepResult sr = env.step(joint);
    for (int i = 0; i < cfg.n_agents; ++i) {
      check(st.t, i, "x", st.x_km[i], env.states()[i].x_km);
      check(st.t, i, "y", st.y_km[i], env.states()[i].y_km);
      check(st.t, i, "alt", st.alt_m[i], env.states()[i].altitude_m);
    }
    check(st.t, -1, "reward", st.reward, sr.reward);
    check(st.t, -1, "coverage_ratio", st.coverage_ratio, sr.coverage_ratio);
    check(st.t, -1, "separation", st.separation, sr.dispersion);
    if (sr.done) break;
  }
  return res;
}

}  // namespace habcov
