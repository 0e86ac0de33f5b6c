#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "habcov/metrics.hpp"

using namespace habcov;

namespace {

// Hand-built trace: fixed agent positions per step, config defaults.
EpisodeTrace make_trace(const std::vector<std::vector<std::pair<double, double>>>& steps,
                        int episode_steps = 0) {
  EpisodeTrace tr;
  tr.n_agents = static_cast<int>(steps.front().size());
  EnvConfig cfg;
  cfg.n_agents = tr.n_agents;
  cfg.episode_steps = episode_steps > 0 ? episode_steps
                                        : static_cast<int>(steps.size());
  tr.config_kv = cfg.to_kv();
  for (int i = 0; i < tr.n_agents; ++i) tr.init.push_back({i, 0, 0, 20000});
  int t = 0;
  for (const auto& positions : steps) {
    TraceStep st;
    st.t = ++t;
    for (auto [x, y] : positions) {
      st.x_km.push_back(x);
      st.y_km.push_back(y);
      st.alt_m.push_back(20000.0);
      st.action.push_back(1);
    }
    st.reward = 0.0;
    st.coverage_ratio = 0.0;
    st.separation = 0.0;
    tr.steps.push_back(std::move(st));
  }
  return tr;
}

}  // namespace

TEST_CASE("TWR of a pinned center agent is 1; half-inside is 0.5") {
  std::vector<std::vector<std::pair<double, double>>> steps;
  for (int t = 0; t < 2880; ++t) {
    double x = t < 1440 ? 0.0 : 400.0;
    steps.push_back({{0.0, 0.0}, {x, 0.0}});
  }
  EpisodeTrace tr = make_trace(steps);
  TwrResult res = compute_twr(tr, 150.0);
  CHECK(res.per_agent[0] == 1.0);
  CHECK(res.per_agent[1] == 0.5);
  CHECK(res.group == doctest::Approx(0.75));
}

TEST_CASE("TWR equals the mean recorded coverage ratio on simulated traces") {
  EnvConfig cfg;
  cfg.n_agents = 3;
  cfg.n_levels = 5;
  cfg.episode_steps = 200;
  cfg.wind.truth = "random";
  cfg.wind.seed = 3;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Environment env(cfg);
    env.reset(seed);
    Rng rng(seed);
    while (!env.done()) {
      std::vector<Action> joint;
      for (int i = 0; i < cfg.n_agents; ++i) {
        joint.push_back(static_cast<Action>(rng.uniform_int(kNumActions)));
      }
      env.step(joint);
    }
    EpisodeTrace tr = env.trace();
    double logged = 0.0;
    for (const auto& st : tr.steps) logged += st.coverage_ratio;
    logged /= static_cast<double>(tr.steps.size());
    CHECK(std::abs(compute_twr(tr, cfg.r_coverage_km).group - logged) <= 1e-12);
  }
}

TEST_CASE("separation worked examples") {
  SUBCASE("two agents 150 km apart, eval ratio 0.5") {
    std::vector<std::vector<std::pair<double, double>>> steps(
        10, {{-75.0, 0.0}, {75.0, 0.0}});
    EpisodeTrace tr = make_trace(steps);
    CHECK(compute_separation(tr, SeparationNorm::kEval, 150.0) ==
          doctest::Approx(0.5));
  }
  SUBCASE("coincident agents score zero") {
    std::vector<std::vector<std::pair<double, double>>> steps(
        10, {{5.0, 5.0}, {5.0, 5.0}});
    EpisodeTrace tr = make_trace(steps);
    CHECK(compute_separation(tr, SeparationNorm::kEval, 150.0) == 0.0);
    CHECK(compute_separation(tr, SeparationNorm::kTrain, 150.0) == 0.0);
  }
  SUBCASE("four agents at mean pairwise spacing 75") {
    // Pairwise distances: four sides 53.033, two diagonals 75 -> rescale a
    // square so the mean is exactly 75: mean = (4s + 2*s*sqrt(2))/6.
    double side = 75.0 * 6.0 / (4.0 + 2.0 * std::sqrt(2.0));
    double h = side / 2.0;
    std::vector<std::vector<std::pair<double, double>>> steps(
        4, {{-h, -h}, {h, -h}, {-h, h}, {h, h}});
    EpisodeTrace tr = make_trace(steps);
    CHECK(compute_separation(tr, SeparationNorm::kTrain, 150.0) ==
          doctest::Approx(1.0));  // d_target = 150/sqrt(4) = 75
    CHECK(compute_separation(tr, SeparationNorm::kEval, 150.0) ==
          doctest::Approx(0.25));  // 75 / 300
  }
  SUBCASE("steps with fewer than two inside contribute zero") {
    std::vector<std::vector<std::pair<double, double>>> steps;
    for (int t = 0; t < 10; ++t) {
      if (t < 5) {
        steps.push_back({{-75.0, 0.0}, {75.0, 0.0}});
      } else {
        steps.push_back({{-75.0, 0.0}, {999.0, 0.0}});
      }
    }
    EpisodeTrace tr = make_trace(steps);
    CHECK(compute_separation(tr, SeparationNorm::kEval, 150.0) ==
          doctest::Approx(0.25));
  }
}

TEST_CASE("separation is invariant under agent relabeling") {
  Rng rng(17);
  std::vector<std::vector<std::pair<double, double>>> steps, permuted;
  for (int t = 0; t < 50; ++t) {
    std::vector<std::pair<double, double>> pos;
    for (int i = 0; i < 4; ++i) {
      pos.push_back({rng.uniform(-200, 200), rng.uniform(-200, 200)});
    }
    steps.push_back(pos);
    std::rotate(pos.begin(), pos.begin() + 1, pos.end());
    permuted.push_back(pos);
  }
  EpisodeTrace a = make_trace(steps), b = make_trace(permuted);
  CHECK(compute_separation(a, SeparationNorm::kEval, 150.0) ==
        doctest::Approx(compute_separation(b, SeparationNorm::kEval, 150.0)));
}

TEST_CASE("heatmap counts, radius rule, and the episode-length cap") {
  HeatmapOptions opt;
  opt.cap = 2880;
  std::vector<std::vector<std::pair<double, double>>> steps(
      2880, {{0.0, 0.0}, {0.1, 0.0}});  // two overlapping stationary agents
  EpisodeTrace tr = make_trace(steps);
  Heatmap hm = accumulate_heatmap(tr, opt);
  int max_count = 0;
  for (int c : hm.counts) max_count = std::max(max_count, c);
  CHECK(max_count == 2880);  // overlap would reach 5760 without the cap

  // Cell-center radius rule around a single agent at the origin.
  std::vector<std::vector<std::pair<double, double>>> solo(
      100, {{0.0, 0.0}});
  Heatmap single = accumulate_heatmap(make_trace(solo, 100), [] {
    HeatmapOptions o;
    o.cap = 100;
    return o;
  }());
  for (int iy = 0; iy < single.height; ++iy) {
    for (int ix = 0; ix < single.width; ++ix) {
      double d = std::hypot(single.center_x(ix), single.center_y(iy));
      if (d <= 50.0) {
        CHECK(single.at(ix, iy) == 100);
      } else {
        CHECK(single.at(ix, iy) == 0);
      }
    }
  }
}

TEST_CASE("adding a second agent never decreases any heatmap cell") {
  Rng rng(23);
  std::vector<std::vector<std::pair<double, double>>> one, two;
  for (int t = 0; t < 100; ++t) {
    std::pair<double, double> a{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    std::pair<double, double> b{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    one.push_back({a});
    two.push_back({a, b});
  }
  HeatmapOptions opt;
  opt.cap = 100;
  Heatmap h1 = accumulate_heatmap(make_trace(one, 100), opt);
  Heatmap h2 = accumulate_heatmap(make_trace(two, 100), opt);
  for (std::size_t k = 0; k < h1.counts.size(); ++k) {
    CHECK(h2.counts[k] >= h1.counts[k]);
  }
}

TEST_CASE("coverage statistics: parked agent covers one ninth of the disc") {
  std::vector<std::vector<std::pair<double, double>>> steps(100, {{0.0, 0.0}});
  EpisodeTrace tr = make_trace(steps, 100);
  HeatmapOptions opt;
  opt.cap = 100;
  CoverageStats cs = coverage_statistics(tr, opt, 150.0);
  CHECK(cs.percent_area_coverage == doctest::Approx(1.0 / 9.0).epsilon(0.25));
  CHECK(cs.mean_coverage_over_time == doctest::Approx(cs.percent_area_coverage));
  CHECK(cs.mean_area_per_agent == doctest::Approx(cs.percent_area_coverage));
}

TEST_CASE("coverage statistics: full and empty extremes") {
  // 25 agents on a grid blanket the 150 km disc with 50 km footprints.
  std::vector<std::pair<double, double>> blanket;
  for (int gx = -2; gx <= 2; ++gx) {
    for (int gy = -2; gy <= 2; ++gy) {
      blanket.push_back({gx * 65.0, gy * 65.0});
    }
  }
  std::vector<std::vector<std::pair<double, double>>> steps(10, blanket);
  EpisodeTrace tr = make_trace(steps, 10);
  HeatmapOptions opt;
  opt.cap = 10;
  CoverageStats cs = coverage_statistics(tr, opt, 150.0);
  CHECK(cs.percent_area_coverage == 1.0);
  CHECK(cs.mean_coverage_over_time == 1.0);

  std::vector<std::vector<std::pair<double, double>>> nowhere(
      10, {{1000.0, 1000.0}});
  CoverageStats empty = coverage_statistics(make_trace(nowhere, 10), opt, 150.0);
  CHECK(empty.percent_area_coverage == 0.0);
  CHECK(empty.mean_coverage_over_time == 0.0);
}

TEST_CASE("episode metrics stay in range and round-trip through csv") {
  EnvConfig cfg;
  cfg.n_agents = 3;
  cfg.n_levels = 4;
  cfg.episode_steps = 60;
  cfg.wind.truth = "compass";
  Environment env(cfg);
  env.reset(77);
  std::vector<Action> joint(3, Action::kMaintain);
  while (!env.done()) env.step(joint);
  EpisodeMetrics m = episode_metrics(env.trace());
  for (double v : {m.mean_group_twr, m.mean_separation_ratio,
                   m.percent_area_coverage, m.mean_area_per_agent,
                   m.mean_coverage_over_time}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  auto path = std::filesystem::temp_directory_path() / "habcov_metrics.csv";
  {
    std::ofstream out(path);
    out << episode_metrics_csv_header() << '\n'
        << episode_metrics_csv_row(m) << '\n';
  }
  auto rows = load_metrics_csv(path.string());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_group_twr == m.mean_group_twr);
  CHECK(rows[0].episode_return == m.episode_return);
}

TEST_CASE("heatmap save/load round-trip") {
  std::vector<std::vector<std::pair<double, double>>> steps(20, {{10.0, -30.0}});
  HeatmapOptions opt;
  opt.cap = 20;
  Heatmap hm = accumulate_heatmap(make_trace(steps, 20), opt);
  auto path = std::filesystem::temp_directory_path() / "habcov_heatmap.txt";
  save_heatmap(hm, path.string());
  Heatmap back = load_heatmap(path.string());
  CHECK(back.width == hm.width);
  CHECK(back.counts == hm.counts);
}
