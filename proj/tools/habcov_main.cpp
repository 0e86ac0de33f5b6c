#include <CLI11.hpp>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include "habcov/metrics.hpp"
#include "habcov/qmix.hpp"
#include "habcov/runconfig.hpp"
#include "habcov/voronoi.hpp"

namespace fs = std::filesystem;
using namespace habcov;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seed_flags;
  std::string seeds_file;
  int agents = 0;
  int levels = 0;
  int steps = 0;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_workers = false) {
  cmd->add_option("--config", f.config_path, "run config file (key = value with sections)");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--seed", f.seed_flags, "seed (repeatable)");
  cmd->add_option("--seeds", f.seeds_file, "file with one seed per line");
  cmd->add_option("--agents", f.agents, "override env.n_agents");
  cmd->add_option("--levels", f.levels, "override env.n_levels");
  cmd->add_option("--steps", f.steps, "override env.episode_steps");
  if (with_workers) {
    cmd->add_option("--workers", f.workers, "parallel workers for seed batches");
  }
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config_path.empty()) {
    cfg = RunConfig::from_kv(parse_config_file(f.config_path));
  }
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.agents > 0) cfg.env.n_agents = f.agents;
  if (f.levels > 0) cfg.env.n_levels = f.levels;
  if (f.steps > 0) cfg.env.episode_steps = f.steps;
  if (!f.seeds_file.empty()) {
    std::ifstream in(f.seeds_file);
    if (!in) throw ConfigError("cannot open seeds file: " + f.seeds_file);
    cfg.seeds.clear();
    std::uint64_t s;
    while (in >> s) cfg.seeds.push_back(s);
  }
  if (!f.seed_flags.empty()) cfg.seeds = f.seed_flags;
  cfg.validate();
  return cfg;
}

void write_seed_manifest(const RunConfig& cfg) {
  std::ofstream out(cfg.out_dir + "/seeds.txt");
  for (auto s : cfg.seeds) out << s << '\n';
}

// Runs fn(i) for i in [0, n) across workers; results land in caller-indexed
// slots so output order is independent of scheduling.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int count = std::min(workers, n);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

void write_metrics_and_traces(const RunConfig& cfg,
                              const std::vector<EpisodeTrace>& traces,
                              bool dump_heatmaps, bool dump_csv) {
  std::ofstream metrics(cfg.out_dir + "/metrics.csv");
  metrics << episode_metrics_csv_header() << '\n';
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string tag = std::to_string(cfg.seeds[i]);
    traces[i].save(cfg.out_dir + "/trace_" + tag + ".txt");
    if (dump_csv) traces[i].save_csv(cfg.out_dir + "/trace_" + tag + ".csv");
    metrics << episode_metrics_csv_row(episode_metrics(traces[i])) << '\n';
    if (dump_heatmaps) {
      HeatmapOptions opt;
      opt.cap = cfg.env.episode_steps;
      save_heatmap(accumulate_heatmap(traces[i], opt),
                   cfg.out_dir + "/heatmap_" + tag + ".txt");
    }
  }
}

int cmd_train(const CommonFlags& flags, std::uint64_t master_seed,
              const std::string& resume_path) {
  RunConfig cfg = resolve_config(flags);
  if (master_seed != 0) cfg.train.master_seed = master_seed;
  fs::create_directories(cfg.out_dir);
  cfg.echo(cfg.out_dir + "/config.resolved");
  write_seed_manifest(cfg);

  std::unique_ptr<QmixLearner> learner;
  if (!resume_path.empty()) {
    learner = QmixLearner::load_checkpoint(resume_path, cfg.env);
  } else {
    learner = std::make_unique<QmixLearner>(cfg.env, cfg.train);
  }
  TrainResult result = learner->train(cfg.out_dir);
  std::cout << "trained " << result.env_steps << " env steps over "
            << result.episodes << " episodes; checkpoint at "
            << result.checkpoint_path << '\n';
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& checkpoint_path,
             bool dump_heatmaps, bool dump_csv) {
  RunConfig cfg = resolve_config(flags);
  if (cfg.seeds.empty()) throw ConfigError("eval requires at least one seed");
  auto learner = QmixLearner::load_checkpoint(checkpoint_path, cfg.env);
  fs::create_directories(cfg.out_dir);
  cfg.echo(cfg.out_dir + "/config.resolved");
  write_seed_manifest(cfg);

  std::vector<EpisodeTrace> traces(cfg.seeds.size());
  parallel_for(static_cast<int>(cfg.seeds.size()), flags.workers, [&](int i) {
    traces[i] = run_greedy_episode(learner->model(), cfg.env, cfg.seeds[i]);
  });
  write_metrics_and_traces(cfg, traces, dump_heatmaps, dump_csv);
  std::cout << "evaluated " << cfg.seeds.size() << " seeds into " << cfg.out_dir
            << '\n';
  return 0;
}

int cmd_baseline(const CommonFlags& flags, bool dump_partitions,
                 bool dump_heatmaps, bool dump_csv) {
  RunConfig cfg = resolve_config(flags);
  if (cfg.seeds.empty()) throw ConfigError("baseline requires at least one seed");
  fs::create_directories(cfg.out_dir);
  cfg.echo(cfg.out_dir + "/config.resolved");
  write_seed_manifest(cfg);

  std::vector<BaselineEpisode> episodes(cfg.seeds.size());
  parallel_for(static_cast<int>(cfg.seeds.size()), flags.workers, [&](int i) {
    episodes[i] = run_baseline_episode(cfg.env, cfg.seeds[i], cfg.baseline);
  });
  std::vector<EpisodeTrace> traces;
  traces.reserve(episodes.size());
  for (auto& e : episodes) traces.push_back(std::move(e.trace));
  write_metrics_and_traces(cfg, traces, dump_heatmaps, dump_csv);
  if (dump_partitions) {
    for (std::size_t i = 0; i < episodes.size(); ++i) {
      save_waypoint_log(episodes[i].waypoint_log,
                        cfg.out_dir + "/partitions_" +
                            std::to_string(cfg.seeds[i]) + ".csv");
    }
  }
  std::cout << "ran baseline on " << cfg.seeds.size() << " seeds into "
            << cfg.out_dir << '\n';
  return 0;
}

struct FieldSummary {
  double mean_a = 0, mean_b = 0, mean_delta = 0, sd_delta = 0;
  double min_delta = 0, max_delta = 0;
};

int cmd_compare(const std::string& dir_a, const std::string& dir_b) {
  auto rows_a = load_metrics_csv(dir_a + "/metrics.csv");
  auto rows_b = load_metrics_csv(dir_b + "/metrics.csv");
  std::map<std::uint64_t, EpisodeMetrics> by_seed_b;
  for (const auto& r : rows_b) by_seed_b[r.seed] = r;
  std::vector<std::pair<EpisodeMetrics, EpisodeMetrics>> paired;
  for (const auto& a : rows_a) {
    auto it = by_seed_b.find(a.seed);
    if (it != by_seed_b.end()) paired.emplace_back(a, it->second);
  }
  if (paired.empty()) {
    throw ConfigError("no common seeds between " + dir_a + " and " + dir_b);
  }

  const std::vector<std::pair<std::string, double EpisodeMetrics::*>> fields = {
      {"mean_group_twr", &EpisodeMetrics::mean_group_twr},
      {"mean_separation_ratio", &EpisodeMetrics::mean_separation_ratio},
      {"percent_area_coverage", &EpisodeMetrics::percent_area_coverage},
      {"mean_area_per_agent", &EpisodeMetrics::mean_area_per_agent},
      {"mean_coverage_over_time", &EpisodeMetrics::mean_coverage_over_time},
      {"episode_return", &EpisodeMetrics::episode_return},
  };
  std::cout << "paired seeds: " << paired.size() << " (A=" << dir_a
            << ", B=" << dir_b << ")\n";
  std::cout << "metric,mean_a,mean_b,mean_delta,sd_delta,min_delta,max_delta\n";
  for (const auto& [name, member] : fields) {
    FieldSummary s;
    s.min_delta = std::numeric_limits<double>::infinity();
    s.max_delta = -std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : paired) {
      double va = a.*member, vb = b.*member, d = vb - va;
      s.mean_a += va;
      s.mean_b += vb;
      s.mean_delta += d;
      s.min_delta = std::min(s.min_delta, d);
      s.max_delta = std::max(s.max_delta, d);
    }
    const double n = static_cast<double>(paired.size());
    s.mean_a /= n;
    s.mean_b /= n;
    s.mean_delta /= n;
    for (const auto& [a, b] : paired) {
      double d = (b.*member - a.*member) - s.mean_delta;
      s.sd_delta += d * d;
    }
    s.sd_delta = std::sqrt(s.sd_delta / n);
    std::cout.precision(10);
    std::cout << name << ',' << s.mean_a << ',' << s.mean_b << ','
              << s.mean_delta << ',' << s.sd_delta << ',' << s.min_delta << ','
              << s.max_delta << '\n';
  }
  return 0;
}

int cmd_replay(const std::string& trace_path) {
  EpisodeTrace trace = EpisodeTrace::load(trace_path);
  ReplayResult res = verify_replay(trace);
  if (!res.ok) {
    std::cerr << "replay mismatch: " << res.mismatches.size() << " difference(s)\n";
    for (const auto& m : res.mismatches) {
      std::cerr << "  step " << m.step << " agent " << m.agent_id << " field "
                << m.field << ": trace has " << m.expected << ", replay gives "
                << m.actual << '\n';
    }
    return 2;
  }
  EpisodeMetrics m = episode_metrics(trace);
  std::cout << "replay ok: " << trace.steps.size() << " steps, seed "
            << trace.seed << '\n';
  std::cout << episode_metrics_csv_header() << '\n'
            << episode_metrics_csv_row(m) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"habcov: multi-agent high-altitude balloon coverage simulator"};
  app.require_subcommand(0, 1);
  bool dump_defaults = false;
  app.add_flag("--dump-defaults", dump_defaults, "print the default config and exit");

  CommonFlags train_flags, eval_flags, baseline_flags;
  std::uint64_t train_seed = 0;
  std::string resume_path, checkpoint_path, trace_path, dir_a, dir_b;
  bool dump_partitions = false;
  bool dump_heatmaps = false;
  bool dump_csv = false;

  CLI::App* train = app.add_subcommand("train", "train the QMIX controller");
  add_common(train, train_flags);
  train->add_option("--master-seed", train_seed, "override train.seed");
  train->add_option("--resume", resume_path, "checkpoint to resume from");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint greedily");
  add_common(eval, eval_flags, true);
  eval->add_option("--checkpoint", checkpoint_path, "trained checkpoint")->required();
  eval->add_flag("--dump-heatmaps", dump_heatmaps, "write per-seed heatmap grids");
  eval->add_flag("--dump-csv", dump_csv, "also write traces as long-form CSV");

  CLI::App* baseline = app.add_subcommand("baseline", "run the Voronoi baseline");
  add_common(baseline, baseline_flags, true);
  baseline->add_flag("--dump-partitions", dump_partitions,
                     "write per-refresh waypoint CSVs");
  baseline->add_flag("--dump-heatmaps", dump_heatmaps,
                     "write per-seed heatmap grids");
  baseline->add_flag("--dump-csv", dump_csv, "also write traces as long-form CSV");

  CLI::App* compare = app.add_subcommand("compare", "paired-seed metric deltas");
  compare->add_option("dir_a", dir_a, "first run directory")->required();
  compare->add_option("dir_b", dir_b, "second run directory")->required();

  CLI::App* replay = app.add_subcommand("replay", "verify a trace bit-exactly");
  replay->add_option("trace", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_defaults) {
      std::cout << dump_default_config();
      return 0;
    }
    if (train->parsed()) return cmd_train(train_flags, train_seed, resume_path);
    if (eval->parsed()) return cmd_eval(eval_flags, checkpoint_path, dump_heatmaps, dump_csv);
    if (baseline->parsed()) return cmd_baseline(baseline_flags, dump_partitions, dump_heatmaps, dump_csv);
    if (compare->parsed()) return cmd_compare(dir_a, dir_b);
    if (replay->parsed()) return cmd_replay(trace_path);
    std::cout << app.help();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const TraceParseError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
