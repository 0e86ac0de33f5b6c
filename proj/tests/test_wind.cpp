#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "habcov/rng.hpp"
#include "habcov/wind.hpp"

using namespace habcov;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("single full-extent layer is constant everywhere") {
  LayeredWindModel model({{20000.0, 0.0, 10.0, 20000.0}});
  for (double alt : {15000.0, 17350.0, 20000.0, 25000.0}) {
    WindSample s = sample_wind(model, -42.0, 17.0, alt, 0.0);
    CHECK(s.bearing_rad == doctest::Approx(0.0));
    CHECK(s.speed_mps == doctest::Approx(10.0));
  }
}

TEST_CASE("two-layer blend matches the vector formula") {
  // Layer A: north 10 m/s at 16 km; layer B: south 20 m/s at 24 km; both with
  // 8 km triangular extent.
  LayeredWindModel model({{16000.0, 0.0, 10.0, 8000.0},
                          {24000.0, M_PI, 20.0, 8000.0}});

  // Midpoint: equal weights 0.5/0.5 -> (0, 5 - 10) = (0, -5): south at 5 m/s.
  WindSample mid = sample_wind(model, 0.0, 0.0, 20000.0, 0.0);
  CHECK(mid.bearing_rad == doctest::Approx(M_PI));
  CHECK(mid.speed_mps == doctest::Approx(5.0));

  // 22 km: weights 0.25/0.75 -> (0, 2.5 - 15) = (0, -12.5).
  WindSample upper = sample_wind(model, 0.0, 0.0, 22000.0, 0.0);
  CHECK(upper.bearing_rad == doctest::Approx(M_PI));
  CHECK(upper.speed_mps == doctest::Approx(12.5));

  // Cross-check against the blend computed on components.
  for (double alt : {16500.0, 18000.0, 21000.0, 23500.0}) {
    double w1 = std::max(0.0, 1.0 - std::abs(alt - 16000.0) / 8000.0);
    double w2 = std::max(0.0, 1.0 - std::abs(alt - 24000.0) / 8000.0);
    double v = (w1 * 10.0 + w2 * -20.0) / (w1 + w2);
    WindSample s = sample_wind(model, 0.0, 0.0, alt, 0.0);
    CHECK(s.speed_mps == doctest::Approx(std::abs(v)));
    CHECK(s.bearing_rad == doctest::Approx(v >= 0 ? 0.0 : M_PI));
  }
}

TEST_CASE("layered blend speed never exceeds the largest layer speed") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<WindLayer> layers;
    double max_speed = 0.0;
    int n = 2 + static_cast<int>(rng.uniform_int(3));
    for (int i = 0; i < n; ++i) {
      WindLayer l;
      l.center_alt_m = rng.uniform(15000.0, 25000.0);
      l.bearing_rad = rng.uniform(0.0, 2.0 * M_PI);
      l.speed_mps = rng.uniform(0.0, 30.0);
      l.extent_m = 12000.0;
      max_speed = std::max(max_speed, l.speed_mps);
      layers.push_back(l);
    }
    LayeredWindModel model(layers);
    double alt = rng.uniform(15000.0, 25000.0);
    WindSample s = sample_wind(model, 0.0, 0.0, alt, 0.0);
    CHECK(s.speed_mps <= max_speed + 1e-9);
    CHECK(s.bearing_rad >= 0.0);
    CHECK(s.bearing_rad < 2.0 * M_PI);
  }
}

TEST_CASE("layer stack must cover the full altitude band") {
  CHECK_THROWS_AS(LayeredWindModel({{24000.0, 0.0, 5.0, 2000.0}}),
                  std::invalid_argument);
}

TEST_CASE("altitude outside the band is a domain error") {
  auto model = make_uniform_wind(0.0, 10.0);
  CHECK_THROWS_AS(sample_wind(*model, 0, 0, 14999.0, 0), std::domain_error);
  CHECK_THROWS_AS(sample_wind(*model, 0, 0, 25001.0, 0), std::domain_error);
}

TEST_CASE("zero-noise forecast equals truth exactly") {
  auto truth = make_compass_wind(7.0);
  ForecastModel forecast(truth, 0.0, 0.0, 2000.0, 123);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    double x = rng.uniform(-200, 200), y = rng.uniform(-200, 200);
    double alt = rng.uniform(15000, 25000), t = rng.uniform(0, 2880);
    WindSample a = sample_wind(*truth, x, y, alt, t);
    WindSample b = sample_wind(forecast, x, y, alt, t);
    CHECK(a.bearing_rad == b.bearing_rad);
    CHECK(a.speed_mps == b.speed_mps);
  }
}

TEST_CASE("noisy forecast is deterministic, bounded, and differs from truth") {
  auto truth = make_uniform_wind(1.0, 10.0);
  ForecastModel f1(truth, 0.3, 2.0, 2000.0, 5);
  ForecastModel f2(truth, 0.3, 2.0, 2000.0, 5);
  bool any_diff = false;
  for (double alt = 15000.0; alt <= 25000.0; alt += 500.0) {
    WindSample a = f1.sample(0, 0, alt, 10.0);
    WindSample b = f2.sample(0, 0, alt, 10.0);
    CHECK(a.bearing_rad == b.bearing_rad);
    CHECK(a.speed_mps == b.speed_mps);
    CHECK(a.speed_mps >= 0.0);
    CHECK(a.speed_mps <= truth->v_max());
    CHECK(a.bearing_rad >= 0.0);
    CHECK(a.bearing_rad < 2.0 * M_PI);
    WindSample t = truth->sample(0, 0, alt, 10.0);
    if (a.bearing_rad != t.bearing_rad || a.speed_mps != t.speed_mps) {
      any_diff = true;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("column has uniform altitudes spanning the band") {
  auto model = make_uniform_wind(0.0, 10.0);
  WindColumn col = sample_column(*model, 0, 0, 0, 37);
  REQUIRE(col.levels.size() == 37);
  CHECK(col.levels.front().altitude_m == 15000.0);
  CHECK(col.levels.back().altitude_m == 25000.0);
  CHECK(col.levels[1].altitude_m ==
        doctest::Approx(15000.0 + 10000.0 / 36.0));
  for (std::size_t i = 1; i < col.levels.size(); ++i) {
    CHECK(col.levels[i].altitude_m - col.levels[i - 1].altitude_m ==
          doctest::Approx(10000.0 / 36.0));
  }
  // Constant field: all samples identical.
  for (const auto& lvl : col.levels) {
    CHECK(lvl.wind.bearing_rad == 0.0);
    CHECK(lvl.wind.speed_mps == 10.0);
  }

  WindColumn two = sample_column(*model, 0, 0, 0, 2);
  REQUIRE(two.levels.size() == 2);
  CHECK(two.levels[0].altitude_m == 15000.0);
  CHECK(two.levels[1].altitude_m == 25000.0);

  CHECK_THROWS_AS(sample_column(*model, 0, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("column entries equal direct samples exactly") {
  auto model = make_random_layered(21, 5);
  WindColumn col = sample_column(*model, 3.0, -8.0, 42.0, 13);
  for (const auto& lvl : col.levels) {
    WindSample s = sample_wind(*model, 3.0, -8.0, lvl.altitude_m, 42.0);
    CHECK(lvl.wind.bearing_rad == s.bearing_rad);
    CHECK(lvl.wind.speed_mps == s.speed_mps);
  }
}

TEST_CASE("gridded model: constant grid returns the constant") {
  std::string text =
      "# constant northward 10 m/s\n"
      "axis x: 0 100\n"
      "axis y: 0 100\n"
      "axis z: 15000 25000\n"
      "axis t: 0 100\n";
  for (int i = 0; i < 16; ++i) text += "0 10\n";
  fs::path p = write_temp("habcov_wind_const.txt", text);
  auto model = load_gridded_wind(p.string());
  WindSample s = sample_wind(*model, 50.0, 25.0, 18000.0, 30.0);
  CHECK(s.bearing_rad == doctest::Approx(0.0));
  CHECK(s.speed_mps == doctest::Approx(10.0));
  CHECK(model->time_horizon_min().has_value());
  CHECK(*model->time_horizon_min() == 100.0);
}

TEST_CASE("gridded model: zero wind everywhere") {
  std::string text =
      "axis x: 0 100\naxis y: 0 100\naxis z: 15000 25000\naxis t: 0 100\n";
  for (int i = 0; i < 16; ++i) text += "0 0\n";
  fs::path p = write_temp("habcov_wind_zero.txt", text);
  auto model = load_gridded_wind(p.string());
  CHECK(sample_wind(*model, 1, 2, 20000, 3).speed_mps == 0.0);
}

TEST_CASE("gridded model: linear-in-altitude speed interpolates to midpoint") {
  std::string text =
      "axis x: 0\naxis y: 0\naxis z: 15000 25000\naxis t: 0\n"
      "0 0\n"
      "0 20\n";
  fs::path p = write_temp("habcov_wind_linear.txt", text);
  auto model = load_gridded_wind(p.string());
  CHECK(sample_wind(*model, 0, 0, 20000, 0).speed_mps == doctest::Approx(10.0));
  CHECK(sample_wind(*model, 0, 0, 17500, 0).speed_mps == doctest::Approx(5.0));
  // Horizontal/temporal queries outside the grid clamp to the edge.
  CHECK(sample_wind(*model, 999.0, -999.0, 20000, 777.0).speed_mps ==
        doctest::Approx(10.0));
}

TEST_CASE("gridded model: componentwise bounds hold under interpolation") {
  Rng rng(4);
  std::string text =
      "axis x: 0 50 100\naxis y: 0 100\naxis z: 15000 20000 25000\naxis t: 0 60\n";
  double umin = 1e9, umax = -1e9, vmin = 1e9, vmax = -1e9;
  for (int i = 0; i < 3 * 2 * 3 * 2; ++i) {
    double u = rng.uniform(-20, 20), v = rng.uniform(-20, 20);
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
    text += std::to_string(u) + " " + std::to_string(v) + "\n";
  }
  fs::path p = write_temp("habcov_wind_rand.txt", text);
  auto model = load_gridded_wind(p.string());
  double speed_cap = std::hypot(std::max(std::abs(umin), umax),
                                std::max(std::abs(vmin), vmax));
  for (int i = 0; i < 200; ++i) {
    WindSample s = sample_wind(*model, rng.uniform(0, 100), rng.uniform(0, 100),
                               rng.uniform(15000, 25000), rng.uniform(0, 60));
    CHECK(s.speed_mps <= speed_cap + 1e-9);
  }
}

TEST_CASE("gridded parse errors name the line") {
  fs::path bad_header = write_temp("habcov_wind_badhdr.txt",
                                   "axis x: 0 1\naxis q: 0 1\n");
  CHECK_THROWS_WITH_AS(load_gridded_wind(bad_header.string()),
                       doctest::Contains("line 2"), WindParseError);

  fs::path non_mono = write_temp(
      "habcov_wind_nonmono.txt",
      "axis x: 0 1\naxis y: 0 1\naxis z: 25000 15000\naxis t: 0 1\n");
  CHECK_THROWS_WITH_AS(load_gridded_wind(non_mono.string()),
                       doctest::Contains("line 3"), WindParseError);

  std::string nan_cell =
      "axis x: 0\naxis y: 0\naxis z: 15000 25000\naxis t: 0\n0 0\nnan 5\n";
  fs::path nan_p = write_temp("habcov_wind_nan.txt", nan_cell);
  CHECK_THROWS_WITH_AS(load_gridded_wind(nan_p.string()),
                       doctest::Contains("line 6"), WindParseError);

  std::string truncated =
      "axis x: 0\naxis y: 0\naxis z: 15000 25000\naxis t: 0\n0 0\n";
  fs::path trunc_p = write_temp("habcov_wind_trunc.txt", truncated);
  CHECK_THROWS_WITH_AS(load_gridded_wind(trunc_p.string()),
                       doctest::Contains("truncated"), WindParseError);
}

TEST_CASE("wind spec round-trips through key-value form") {
  WindSpec spec;
  spec.truth = "layers";
  spec.layers = layers_to_text({{16000.0, 0.25, 8.0, 9000.0, 1e-4, 0.0},
                                {24000.0, 3.0, 6.0, 9000.0, 0.0, 2e-4}});
  spec.forecast_bearing_sd_rad = 0.1;
  spec.forecast_speed_sd_mps = 1.5;
  spec.forecast_seed = 77;
  WindSpec back = WindSpec::from_kv(spec.to_kv());
  auto m1 = spec.build_truth();
  auto m2 = back.build_truth();
  auto f1 = spec.build_forecast(m1);
  auto f2 = back.build_forecast(m2);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    double alt = rng.uniform(15000, 25000), t = rng.uniform(0, 1000);
    CHECK(m1->sample(0, 0, alt, t).bearing_rad == m2->sample(0, 0, alt, t).bearing_rad);
    CHECK(f1->sample(0, 0, alt, t).speed_mps == f2->sample(0, 0, alt, t).speed_mps);
  }
}

TEST_CASE("temporal drift moves the bearing linearly") {
  LayeredWindModel model({{20000.0, 0.0, 10.0, 20000.0, 1e-3, 0.0}});
  WindSample s0 = sample_wind(model, 0, 0, 20000, 0.0);
  WindSample s1 = sample_wind(model, 0, 0, 20000, 100.0);
  CHECK(s0.bearing_rad == doctest::Approx(0.0));
  CHECK(s1.bearing_rad == doctest::Approx(0.1));
  CHECK(s1.speed_mps == doctest::Approx(10.0));
}
