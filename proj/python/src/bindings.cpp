#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "habcov/environment.hpp"
#include "habcov/metrics.hpp"
#include "habcov/qmix.hpp"
#include "habcov/runconfig.hpp"
#include "habcov/voronoi.hpp"

namespace py = pybind11;
using namespace habcov;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array_2d(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return py::array_t<double>();
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()),
                           static_cast<py::ssize_t>(rows[0].size())});
  auto buf = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < buf.shape(0); ++i) {
    for (py::ssize_t j = 0; j < buf.shape(1); ++j) {
      buf(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

std::vector<Action> to_actions(const std::vector<int>& a) {
  std::vector<Action> out;
  out.reserve(a.size());
  for (int v : a) {
    if (v < 0 || v >= kNumActions) throw std::invalid_argument("action out of range");
    out.push_back(static_cast<Action>(v));
  }
  return out;
}

py::dict metrics_dict(const EpisodeMetrics& m) {
  py::dict d;
  d["seed"] = m.seed;
  d["mean_group_twr"] = m.mean_group_twr;
  d["mean_separation_ratio"] = m.mean_separation_ratio;
  d["percent_area_coverage"] = m.percent_area_coverage;
  d["mean_area_per_agent"] = m.mean_area_per_agent;
  d["mean_coverage_over_time"] = m.mean_coverage_over_time;
  d["episode_return"] = m.episode_return;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-agent high-altitude balloon coverage: wind fields, "
            "environment, QMIX trainer, Voronoi baseline, metrics";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<TraceParseError>(m, "TraceParseError");
  py::register_exception<WindParseError>(m, "WindParseError");

  py::class_<WindSample>(m, "WindSample")
      .def_readonly("bearing_rad", &WindSample::bearing_rad)
      .def_readonly("speed_mps", &WindSample::speed_mps)
      .def("__repr__", [](const WindSample& s) {
        return "WindSample(bearing_rad=" + std::to_string(s.bearing_rad) +
               ", speed_mps=" + std::to_string(s.speed_mps) + ")";
      });

  py::class_<WindSpec>(m, "WindSpec")
      .def(py::init<>())
      .def_readwrite("truth", &WindSpec::truth)
      .def_readwrite("uniform_bearing_rad", &WindSpec::uniform_bearing_rad)
      .def_readwrite("uniform_speed_mps", &WindSpec::uniform_speed_mps)
      .def_readwrite("opposing_speed_mps", &WindSpec::opposing_speed_mps)
      .def_readwrite("compass_speed_mps", &WindSpec::compass_speed_mps)
      .def_readwrite("seed", &WindSpec::seed)
      .def_readwrite("random_layers", &WindSpec::random_layers)
      .def_readwrite("layers", &WindSpec::layers)
      .def_readwrite("file", &WindSpec::file)
      .def_readwrite("v_max", &WindSpec::v_max)
      .def_readwrite("forecast_bearing_sd_rad", &WindSpec::forecast_bearing_sd_rad)
      .def_readwrite("forecast_speed_sd_mps", &WindSpec::forecast_speed_sd_mps)
      .def_readwrite("forecast_corr_len_m", &WindSpec::forecast_corr_len_m)
      .def_readwrite("forecast_seed", &WindSpec::forecast_seed);

  py::class_<WindModel, std::shared_ptr<WindModel>>(m, "WindModel")
      .def("sample",
           [](const WindModel& model, double x, double y, double alt, double t) {
             return sample_wind(model, x, y, alt, t);
           },
           py::arg("x_km"), py::arg("y_km"), py::arg("altitude_m"),
           py::arg("t_min"))
      .def("column",
           [](const WindModel& model, double x, double y, double t, int levels) {
             WindColumn col = sample_column(model, x, y, t, levels);
             py::array_t<double> out({static_cast<py::ssize_t>(col.levels.size()),
                                      static_cast<py::ssize_t>(3)});
             auto buf = out.mutable_unchecked<2>();
             for (py::ssize_t i = 0; i < buf.shape(0); ++i) {
               const auto& lvl = col.levels[static_cast<std::size_t>(i)];
               buf(i, 0) = lvl.altitude_m;
               buf(i, 1) = lvl.wind.bearing_rad;
               buf(i, 2) = lvl.wind.speed_mps;
             }
             return out;
           },
           py::arg("x_km"), py::arg("y_km"), py::arg("t_min"),
           py::arg("n_levels"));

  m.def("build_truth_wind",
        [](const WindSpec& spec) {
          return std::const_pointer_cast<WindModel>(spec.build_truth());
        });
  m.def("build_forecast_wind", [](const WindSpec& spec) {
    auto truth = spec.build_truth();
    return std::const_pointer_cast<WindModel>(spec.build_forecast(truth));
  });
  m.def("load_gridded_wind",
        [](const std::string& path, double v_max) {
          return std::static_pointer_cast<WindModel>(load_gridded_wind(path, v_max));
        },
        py::arg("path"), py::arg("v_max") = kDefaultVMax);

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("n_agents", &EnvConfig::n_agents)
      .def_readwrite("n_levels", &EnvConfig::n_levels)
      .def_readwrite("r_coverage_km", &EnvConfig::r_coverage_km)
      .def_readwrite("episode_steps", &EnvConfig::episode_steps)
      .def_readwrite("coverage_weight", &EnvConfig::coverage_weight)
      .def_readwrite("dispersion_weight", &EnvConfig::dispersion_weight)
      .def_readwrite("wind", &EnvConfig::wind)
      .def("obs_dim", &EnvConfig::obs_dim)
      .def("state_dim", &EnvConfig::state_dim);

  py::class_<AgentState>(m, "AgentState")
      .def(py::init<>())
      .def_readwrite("agent_id", &AgentState::agent_id)
      .def_readwrite("x_km", &AgentState::x_km)
      .def_readwrite("y_km", &AgentState::y_km)
      .def_readwrite("altitude_m", &AgentState::altitude_m);

  m.def("compute_reward",
        [](const std::vector<AgentState>& states, const EnvConfig& cfg) {
          RewardBreakdown r = compute_reward(states, cfg);
          return py::make_tuple(r.team_reward, r.coverage_ratio, r.dispersion);
        });

  py::class_<Environment>(m, "Environment")
      .def(py::init<EnvConfig>())
      .def("reset",
           [](Environment& env, std::uint64_t seed) {
             auto rr = env.reset(seed);
             return py::make_tuple(to_array_2d(rr.observations),
                                   to_array(rr.state));
           })
      .def("step",
           [](Environment& env, const std::vector<int>& actions) {
             StepResult sr = env.step(to_actions(actions));
             py::dict info;
             info["coverage_ratio"] = sr.coverage_ratio;
             info["dispersion"] = sr.dispersion;
             info["truncated"] = sr.truncated;
             return py::make_tuple(to_array_2d(sr.observations),
                                   to_array(sr.state), sr.reward, sr.done, info);
           })
      .def("states", [](const Environment& env) { return env.states(); })
      .def_property_readonly("t", &Environment::t)
      .def_property_readonly("done", &Environment::done)
      .def("save_trace", [](const Environment& env, const std::string& path) {
        env.trace().save(path);
      });

  py::class_<EpisodeTrace>(m, "EpisodeTrace")
      .def_readonly("seed", &EpisodeTrace::seed)
      .def_readonly("n_agents", &EpisodeTrace::n_agents)
      .def_readonly("truncated", &EpisodeTrace::truncated)
      .def("n_steps", [](const EpisodeTrace& t) { return t.steps.size(); })
      .def("episode_return", &EpisodeTrace::episode_return)
      .def("save", &EpisodeTrace::save)
      .def("save_csv", &EpisodeTrace::save_csv)
      .def_static("load", &EpisodeTrace::load)
      .def("metrics", [](const EpisodeTrace& t) {
        return metrics_dict(episode_metrics(t));
      });

  m.def("verify_replay", [](const EpisodeTrace& trace) {
    ReplayResult r = verify_replay(trace);
    py::list mismatches;
    for (const auto& mm : r.mismatches) {
      py::dict d;
      d["step"] = mm.step;
      d["agent_id"] = mm.agent_id;
      d["field"] = mm.field;
      d["expected"] = mm.expected;
      d["actual"] = mm.actual;
      mismatches.append(d);
    }
    return py::make_tuple(r.ok, mismatches);
  });

  py::class_<BaselineConfig>(m, "BaselineConfig")
      .def(py::init<>())
      .def_readwrite("lloyd_iterations", &BaselineConfig::lloyd_iterations)
      .def_readwrite("grid_km", &BaselineConfig::grid_km)
      .def_readwrite("refresh_minutes", &BaselineConfig::refresh_minutes)
      .def_readwrite("v_cap_mps", &BaselineConfig::v_cap_mps)
      .def_readwrite("deadband_m", &BaselineConfig::deadband_m)
      .def_readwrite("arrival_km", &BaselineConfig::arrival_km);

  m.def("lloyd_relax",
        [](py::array_t<double> seeds, double radius, int iterations,
           double grid_km) {
          auto buf = seeds.unchecked<2>();
          std::vector<Point2> pts;
          for (py::ssize_t i = 0; i < buf.shape(0); ++i) {
            pts.push_back({buf(i, 0), buf(i, 1)});
          }
          DiscPartition part = lloyd_relax(pts, radius, iterations, grid_km);
          py::array_t<double> out({static_cast<py::ssize_t>(part.centroids.size()),
                                   static_cast<py::ssize_t>(2)});
          auto ob = out.mutable_unchecked<2>();
          for (py::ssize_t i = 0; i < ob.shape(0); ++i) {
            ob(i, 0) = part.centroids[static_cast<std::size_t>(i)].x;
            ob(i, 1) = part.centroids[static_cast<std::size_t>(i)].y;
          }
          return out;
        },
        py::arg("seeds"), py::arg("disc_radius_km"), py::arg("iterations") = 20,
        py::arg("grid_km") = 2.0);

  m.def("run_baseline_episode",
        [](const EnvConfig& cfg, std::uint64_t seed, const BaselineConfig& bc) {
          return run_baseline_episode(cfg, seed, bc).trace;
        },
        py::arg("env_config"), py::arg("seed"),
        py::arg("baseline_config") = BaselineConfig{});

  m.def("run_random_policy_episode", &run_random_policy_episode,
        py::arg("env_config"), py::arg("seed"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("gamma", &TrainConfig::gamma)
      .def_readwrite("eps_start", &TrainConfig::eps_start)
      .def_readwrite("eps_end", &TrainConfig::eps_end)
      .def_readwrite("eps_decay_steps", &TrainConfig::eps_decay_steps)
      .def_readwrite("target_update_interval", &TrainConfig::target_update_interval)
      .def_readwrite("total_env_steps", &TrainConfig::total_env_steps)
      .def_readwrite("warmup_steps", &TrainConfig::warmup_steps)
      .def_readwrite("update_interval", &TrainConfig::update_interval)
      .def_readwrite("buffer_capacity", &TrainConfig::buffer_capacity)
      .def_readwrite("hidden_units", &TrainConfig::hidden_units)
      .def_readwrite("mixing_embed", &TrainConfig::mixing_embed)
      .def_readwrite("grad_clip", &TrainConfig::grad_clip)
      .def_readwrite("eval_every_episodes", &TrainConfig::eval_every_episodes)
      .def_readwrite("eval_episodes", &TrainConfig::eval_episodes)
      .def_readwrite("master_seed", &TrainConfig::master_seed);

  m.def("epsilon_at", &epsilon_at);

  py::class_<QmixLearner>(m, "QmixLearner")
      .def(py::init<const EnvConfig&, const TrainConfig&>())
      .def("train",
           [](QmixLearner& learner, const std::string& out_dir) {
             TrainResult r = learner.train(out_dir);
             py::dict d;
             d["env_steps"] = r.env_steps;
             d["episodes"] = r.episodes;
             d["checkpoint_path"] = r.checkpoint_path;
             return d;
           })
      .def("greedy_actions",
           [](const QmixLearner& learner, py::array_t<double> obs) {
             auto buf = obs.unchecked<2>();
             std::vector<std::vector<double>> rows(
                 static_cast<std::size_t>(buf.shape(0)));
             for (py::ssize_t i = 0; i < buf.shape(0); ++i) {
               rows[static_cast<std::size_t>(i)].assign(buf.data(i, 0),
                                                        buf.data(i, 0) + buf.shape(1));
             }
             std::vector<int> out;
             for (Action a : learner.greedy_actions(rows)) {
               out.push_back(static_cast<int>(a));
             }
             return out;
           })
      .def("run_greedy_episode",
           [](const QmixLearner& learner, std::uint64_t seed) {
             // const_cast-free: model access is read-only in rollouts
             return run_greedy_episode(
                 const_cast<QmixLearner&>(learner).model(),
                 learner.env_config(), seed);
           })
      .def("save_checkpoint", &QmixLearner::save_checkpoint)
      .def_static("load_checkpoint",
                  [](const std::string& path) {
                    return QmixLearner::load_checkpoint(path);
                  })
      .def_property_readonly("env_steps", &QmixLearner::env_steps)
      .def_property_readonly("episodes", &QmixLearner::episodes_done);

  m.def("compute_twr", [](const EpisodeTrace& trace, double r) {
    TwrResult t = compute_twr(trace, r);
    return py::make_tuple(t.per_agent, t.group);
  });
  m.def("compute_separation",
        [](const EpisodeTrace& trace, const std::string& norm, double r) {
          SeparationNorm n = norm == "train" ? SeparationNorm::kTrain
                                             : SeparationNorm::kEval;
          return compute_separation(trace, n, r);
        },
        py::arg("trace"), py::arg("norm"), py::arg("r_coverage_km"));
  m.def("accumulate_heatmap",
        [](const EpisodeTrace& trace, double ground_radius, double cell_km,
           int cap) {
          HeatmapOptions opt;
          opt.ground_radius_km = ground_radius;
          opt.cell_km = cell_km;
          opt.cap = cap;
          Heatmap hm = accumulate_heatmap(trace, opt);
          py::array_t<int> out({static_cast<py::ssize_t>(hm.height),
                                static_cast<py::ssize_t>(hm.width)});
          auto buf = out.mutable_unchecked<2>();
          for (py::ssize_t iy = 0; iy < buf.shape(0); ++iy) {
            for (py::ssize_t ix = 0; ix < buf.shape(1); ++ix) {
              buf(iy, ix) = hm.at(static_cast<int>(ix), static_cast<int>(iy));
            }
          }
          return out;
        },
        py::arg("trace"), py::arg("ground_radius_km") = 50.0,
        py::arg("cell_km") = 5.0, py::arg("cap") = 2880);
}
