#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace habcov {

// Operational altitude band, meters.
constexpr double kAltMinM = 15000.0;
constexpr double kAltMaxM = 25000.0;
constexpr double kDefaultVMax = 50.0;

// Wind at a point. Bearing is the direction of air-mass motion (the direction
// a balloon is pushed toward), clockwise from +y (north), in [0, 2pi).
struct WindSample {
  double bearing_rad = 0.0;
  double speed_mps = 0.0;
};

struct WindLevel {
  double altitude_m = 0.0;
  WindSample wind;
};

struct WindColumn {
  std::vector<WindLevel> levels;
};

// East/north components of a wind vector.
inline void bearing_to_uv(double bearing_rad, double speed_mps, double& u,
                          double& v) {
  u = speed_mps * std::sin(bearing_rad);
  v = speed_mps * std::cos(bearing_rad);
}

double wrap_bearing(double bearing_rad);
WindSample uv_to_sample(double u, double v, double v_max);

class WindModel {
 public:
  virtual ~WindModel() = default;
  // Assumes altitude already validated; use sample_wind() as the public entry.
  virtual WindSample sample(double x_km, double y_km, double altitude_m,
                            double t_min) const = 0;
  // Last time the model has data for; nullopt when the model never exhausts.
  virtual std::optional<double> time_horizon_min() const {
    return std::nullopt;
  }
  virtual double v_max() const { return kDefaultVMax; }
};

WindSample sample_wind(const WindModel& model, double x_km, double y_km,
                       double altitude_m, double t_min);
WindColumn sample_column(const WindModel& model, double x_km, double y_km,
                         double t_min, int n_levels);

struct WindLayer {
  double center_alt_m = 20000.0;
  double bearing_rad = 0.0;
  double speed_mps = 0.0;
  // Triangular weight: 1 at the center, 0 at |alt - center| >= extent.
  double extent_m = 10000.0;
  double bearing_rate_rad_per_min = 0.0;
  double speed_rate_mps_per_min = 0.0;
};

struct SineModulation {
  double bearing_amp_rad = 0.0;
  double speed_amp_mps = 0.0;
  double period_min = 720.0;
};

// Horizontally homogeneous truth model: a stack of drifting wind layers
// blended as east/north vectors with triangular altitude weights.
class LayeredWindModel : public WindModel {
 public:
  LayeredWindModel(std::vector<WindLayer> layers, double v_max = kDefaultVMax,
                   std::uint64_t seed = 0, SineModulation mod = {});

  WindSample sample(double x_km, double y_km, double altitude_m,
                    double t_min) const override;
  double v_max() const override { return v_max_; }
  const std::vector<WindLayer>& layers() const { return layers_; }

 private:
  std::vector<WindLayer> layers_;
  SineModulation mod_;
  std::vector<double> phases_;
  double v_max_;
};

// Noisy view of a truth model: smooth altitude-correlated bearing/speed
// perturbations from a low-frequency sinusoidal basis, fixed per seed.
// With both noise SDs zero the forecast returns the truth sample unchanged.
class ForecastModel : public WindModel {
 public:
  ForecastModel(std::shared_ptr<const WindModel> base, double bearing_sd_rad,
                double speed_sd_mps, double corr_len_m, std::uint64_t seed);

  WindSample sample(double x_km, double y_km, double altitude_m,
                    double t_min) const override;
  std::optional<double> time_horizon_min() const override {
    return base_->time_horizon_min();
  }
  double v_max() const override { return base_->v_max(); }

 private:
  std::shared_ptr<const WindModel> base_;
  double bearing_sd_;
  double speed_sd_;
  double corr_len_m_;
  static constexpr int kHarmonics = 3;
  std::array<double, kHarmonics> bearing_phase_{};
  std::array<double, kHarmonics> speed_phase_{};
};

class WindParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File-backed model with multilinear interpolation over an (x, y, z, t) grid.
// Queries outside the horizontal/temporal grid clamp to the nearest cell.
class GriddedWindModel : public WindModel {
 public:
  GriddedWindModel(std::vector<double> xs_km, std::vector<double> ys_km,
                   std::vector<double> zs_m, std::vector<double> ts_min,
                   std::vector<double> u, std::vector<double> v,
                   double v_max = kDefaultVMax);

  WindSample sample(double x_km, double y_km, double altitude_m,
                    double t_min) const override;
  std::optional<double> time_horizon_min() const override {
    return ts_.back();
  }
  double v_max() const override { return v_max_; }

 private:
  std::vector<double> xs_, ys_, zs_, ts_;
  std::vector<double> u_, v_;  // x-major: ((ix*Ny + iy)*Nz + iz)*Nt + it
  double v_max_;
};

std::shared_ptr<GriddedWindModel> load_gridded_wind(const std::string& path,
                                                    double v_max = kDefaultVMax);

// Built-in truth fields.
std::shared_ptr<LayeredWindModel> make_uniform_wind(double bearing_rad,
                                                    double speed_mps,
                                                    double v_max = kDefaultVMax);
// Northward layer low, southward layer high; station-keeping along y.
std::shared_ptr<LayeredWindModel> make_opposing_wind(double speed_mps = 6.0,
                                                     double v_max = kDefaultVMax);
// Four layers blowing N/E/S/W bottom-to-top; full 2-D reachability.
std::shared_ptr<LayeredWindModel> make_compass_wind(double speed_mps = 6.0,
                                                    double v_max = kDefaultVMax);
std::shared_ptr<LayeredWindModel> make_random_layered(std::uint64_t seed,
                                                      int n_layers = 5,
                                                      double min_speed = 2.0,
                                                      double max_speed = 12.0,
                                                      double v_max = kDefaultVMax);

// Serializable description of a truth/forecast pair; the form traces and run
// configs store so an episode can be rebuilt from its header alone.
struct WindSpec {
  std::string truth = "compass";  // uniform|opposing|compass|random|layers|gridded
  double uniform_bearing_rad = 0.0;
  double uniform_speed_mps = 5.0;
  double opposing_speed_mps = 6.0;
  double compass_speed_mps = 6.0;
  std::uint64_t seed = 1;
  int random_layers = 5;
  std::string layers;  // "alt,bearing,speed,extent[,brate,srate];..."
  std::string file;
  double v_max = kDefaultVMax;
  double forecast_bearing_sd_rad = 0.0;
  double forecast_speed_sd_mps = 0.0;
  double forecast_corr_len_m = 2000.0;
  std::uint64_t forecast_seed = 0;

  std::shared_ptr<const WindModel> build_truth() const;
  std::shared_ptr<const WindModel> build_forecast(
      std::shared_ptr<const WindModel> truth) const;

  std::map<std::string, std::string> to_kv() const;
  static WindSpec from_kv(const std::map<std::string, std::string>& kv);
};

std::vector<WindLayer> parse_layers_text(const std::string& text);
std::string layers_to_text(const std::vector<WindLayer>& layers);

}  // namespace habcov
