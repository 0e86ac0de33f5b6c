#include "habcov/wind.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "habcov/rng.hpp"

namespace habcov {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void check_altitude(double altitude_m) {
  if (!(altitude_m >= kAltMinM && altitude_m <= kAltMaxM)) {
    throw std::domain_error("altitude " + std::to_string(altitude_m) +
                            " m outside operational band [15000, 25000]");
  }
}

}  // namespace

double wrap_bearing(double bearing_rad) {
  double b = std::fmod(bearing_rad, kTwoPi);
  if (b < 0.0) b += kTwoPi;
  if (b >= kTwoPi) b = 0.0;
  return b;
}

WindSample uv_to_sample(double u, double v, double v_max) {
  double speed = std::hypot(u, v);
  if (speed < 1e-12) return WindSample{0.0, 0.0};
  double bearing = wrap_bearing(std::atan2(u, v));
  return WindSample{bearing, std::min(speed, v_max)};
}

WindSample sample_wind(const WindModel& model, double x_km, double y_km,
                       double altitude_m, double t_min) {
  check_altitude(altitude_m);
  return model.sample(x_km, y_km, altitude_m, t_min);
}

WindColumn sample_column(const WindModel& model, double x_km, double y_km,
                         double t_min, int n_levels) {
  if (n_levels < 2) {
    throw std::invalid_argument("sample_column requires n_levels >= 2");
  }
  WindColumn col;
  col.levels.reserve(static_cast<std::size_t>(n_levels));
  for (int i = 0; i < n_levels; ++i) {
    double alt = kAltMinM + (kAltMaxM - kAltMinM) *
                                (static_cast<double>(i) / (n_levels - 1));
    col.levels.push_back({alt, sample_wind(model, x_km, y_km, alt, t_min)});
  }
  return col;
}

LayeredWindModel::LayeredWindModel(std::vector<WindLayer> layers, double v_max,
                                   std::uint64_t seed, SineModulation mod)
    : layers_(std::move(layers)), mod_(mod), v_max_(v_max) {
  if (layers_.empty()) {
    throw std::invalid_argument("LayeredWindModel requires at least one layer");
  }
  // Total triangular weight is piecewise linear with breakpoints at layer
  // centers and extents; positivity at every breakpoint (plus band edges)
  // implies positivity on the whole band.
  std::vector<double> knots{kAltMinM, kAltMaxM};
  for (const auto& l : layers_) {
    for (double z : {l.center_alt_m, l.center_alt_m - l.extent_m,
                     l.center_alt_m + l.extent_m}) {
      if (z > kAltMinM && z < kAltMaxM) knots.push_back(z);
    }
  }
  for (double z : knots) {
    double total = 0.0;
    for (const auto& l : layers_) {
      total += std::max(0.0, 1.0 - std::abs(z - l.center_alt_m) / l.extent_m);
    }
    if (!(total > 0.0)) {
      throw std::invalid_argument(
          "layer stack leaves altitude " + std::to_string(z) +
          " m with zero wind weight");
    }
  }
  Rng rng = Rng::substream(seed, 0, 0, StreamPurpose::kWind);
  phases_.resize(layers_.size());
  for (auto& p : phases_) p = rng.uniform(0.0, kTwoPi);
}

WindSample LayeredWindModel::sample(double, double, double altitude_m,
                                    double t_min) const {
  auto weight = [&](const WindLayer& l) {
    return std::max(0.0, 1.0 - std::abs(altitude_m - l.center_alt_m) / l.extent_m);
  };
  double wsum = 0.0;
  for (const auto& l : layers_) wsum += weight(l);
  double u = 0.0, v = 0.0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const WindLayer& l = layers_[i];
    double w = weight(l);
    if (w <= 0.0) continue;
    double bearing = l.bearing_rad + l.bearing_rate_rad_per_min * t_min;
    double speed = l.speed_mps + l.speed_rate_mps_per_min * t_min;
    if (mod_.period_min > 0.0) {
      double phase = kTwoPi * t_min / mod_.period_min + phases_[i];
      bearing += mod_.bearing_amp_rad * std::sin(phase);
      speed += mod_.speed_amp_mps * std::sin(phase);
    }
    speed = std::clamp(speed, 0.0, v_max_);
    double lu, lv;
    bearing_to_uv(wrap_bearing(bearing), speed, lu, lv);
    u += (w / wsum) * lu;
    v += (w / wsum) * lv;
  }
  return uv_to_sample(u, v, v_max_);
}

ForecastModel::ForecastModel(std::shared_ptr<const WindModel> base,
                             double bearing_sd_rad, double speed_sd_mps,
                             double corr_len_m, std::uint64_t seed)
    : base_(std::move(base)),
      bearing_sd_(bearing_sd_rad),
      speed_sd_(speed_sd_mps),
      corr_len_m_(corr_len_m) {
  if (!base_) throw std::invalid_argument("ForecastModel requires a base model");
  if (corr_len_m_ <= 0.0) corr_len_m_ = 2000.0;
  Rng rng = Rng::substream(seed, 1, 0, StreamPurpose::kWind);
  for (int k = 0; k < kHarmonics; ++k) bearing_phase_[k] = rng.uniform(0.0, kTwoPi);
  for (int k = 0; k < kHarmonics; ++k) speed_phase_[k] = rng.uniform(0.0, kTwoPi);
}

WindSample ForecastModel::sample(double x_km, double y_km, double altitude_m,
                                 double t_min) const {
  WindSample s = base_->sample(x_km, y_km, altitude_m, t_min);
  if (bearing_sd_ == 0.0 && speed_sd_ == 0.0) return s;
  // Wavelengths corr_len * {1, 2, 4}; variance across seeds sums to sd^2.
  const double amp = std::sqrt(2.0 / kHarmonics);
  double db = 0.0, ds = 0.0;
  for (int k = 0; k < kHarmonics; ++k) {
    double wavelength = corr_len_m_ * static_cast<double>(1 << k);
    db += std::sin(kTwoPi * altitude_m / wavelength + bearing_phase_[k]);
    ds += std::sin(kTwoPi * altitude_m / wavelength + speed_phase_[k]);
  }
  s.bearing_rad = wrap_bearing(s.bearing_rad + bearing_sd_ * amp * db);
  s.speed_mps = std::clamp(s.speed_mps + speed_sd_ * amp * ds, 0.0,
                           base_->v_max());
  return s;
}

namespace {

// Bracketing index i such that axis[i] <= q <= axis[i+1], with clamping.
void bracket(const std::vector<double>& axis, double q, std::size_t& i,
             double& frac) {
  if (axis.size() == 1 || q <= axis.front()) {
    i = 0;
    frac = 0.0;
    return;
  }
  if (q >= axis.back()) {
    i = axis.size() - 2;
    frac = 1.0;
    return;
  }
  auto it = std::upper_bound(axis.begin(), axis.end(), q);
  i = static_cast<std::size_t>(it - axis.begin()) - 1;
  frac = (q - axis[i]) / (axis[i + 1] - axis[i]);
}

}  // namespace

GriddedWindModel::GriddedWindModel(std::vector<double> xs_km,
                                   std::vector<double> ys_km,
                                   std::vector<double> zs_m,
                                   std::vector<double> ts_min,
                                   std::vector<double> u, std::vector<double> v,
                                   double v_max)
    : xs_(std::move(xs_km)),
      ys_(std::move(ys_km)),
      zs_(std::move(zs_m)),
      ts_(std::move(ts_min)),
      u_(std::move(u)),
      v_(std::move(v)),
      v_max_(v_max) {
  auto check_axis = [](const std::vector<double>& a, const char* name) {
    if (a.empty()) throw WindParseError(std::string("axis ") + name + " is empty");
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (!(a[i] > a[i - 1])) {
        throw WindParseError(std::string("axis ") + name +
                             " is not strictly increasing");
      }
    }
  };
  check_axis(xs_, "x");
  check_axis(ys_, "y");
  check_axis(zs_, "z");
  check_axis(ts_, "t");
  std::size_t n = xs_.size() * ys_.size() * zs_.size() * ts_.size();
  if (u_.size() != n || v_.size() != n) {
    throw WindParseError("grid cell count mismatch: expected " +
                         std::to_string(n) + " cells, got " +
                         std::to_string(u_.size()));
  }
}

WindSample GriddedWindModel::sample(double x_km, double y_km,
                                    double altitude_m, double t_min) const {
  std::size_t ix, iy, iz, it;
  double fx, fy, fz, ft;
  bracket(xs_, x_km, ix, fx);
  bracket(ys_, y_km, iy, fy);
  bracket(zs_, altitude_m, iz, fz);
  bracket(ts_, t_min, it, ft);
  const std::size_t ny = ys_.size(), nz = zs_.size(), nt = ts_.size();
  auto at = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return ((a * ny + b) * nz + c) * nt + d;
  };
  auto clamp_up = [](std::size_t i, std::size_t n) {
    return std::min(i + 1, n - 1);
  };
  double u = 0.0, v = 0.0;
  for (int corner = 0; corner < 16; ++corner) {
    std::size_t a = (corner & 1) ? clamp_up(ix, xs_.size()) : ix;
    std::size_t b = (corner & 2) ? clamp_up(iy, ny) : iy;
    std::size_t c = (corner & 4) ? clamp_up(iz, nz) : iz;
    std::size_t d = (corner & 8) ? clamp_up(it, nt) : it;
    double w = ((corner & 1) ? fx : 1.0 - fx) * ((corner & 2) ? fy : 1.0 - fy) *
               ((corner & 4) ? fz : 1.0 - fz) * ((corner & 8) ? ft : 1.0 - ft);
    std::size_t k = at(a, b, c, d);
    u += w * u_[k];
    v += w * v_[k];
  }
  return uv_to_sample(u, v, v_max_);
}

namespace {

std::vector<double> parse_axis_line(const std::string& line, int line_no,
                                    const std::string& expect_name) {
  std::istringstream is(line);
  std::string word, name;
  is >> word >> name;
  if (word != "axis" || name != expect_name + ":") {
    throw WindParseError("line " + std::to_string(line_no) +
                         ": expected 'axis " + expect_name + ": ...'");
  }
  std::vector<double> vals;
  double v;
  while (is >> v) {
    if (std::isnan(v)) {
      throw WindParseError("line " + std::to_string(line_no) +
                           ": NaN in axis " + expect_name);
    }
    vals.push_back(v);
  }
  if (!is.eof()) {
    throw WindParseError("line " + std::to_string(line_no) +
                         ": malformed value in axis " + expect_name);
  }
  if (vals.empty()) {
    throw WindParseError("line " + std::to_string(line_no) + ": axis " +
                         expect_name + " has no values");
  }
  for (std::size_t i = 1; i < vals.size(); ++i) {
    if (!(vals[i] > vals[i - 1])) {
      throw WindParseError("line " + std::to_string(line_no) + ": axis " +
                           expect_name + " not strictly increasing");
    }
  }
  return vals;
}

}  // namespace

std::shared_ptr<GriddedWindModel> load_gridded_wind(const std::string& path,
                                                    double v_max) {
  std::ifstream in(path);
  if (!in) throw WindParseError("cannot open wind file: " + path);

  std::vector<std::vector<double>> axes;
  const char* axis_names[4] = {"x", "y", "z", "t"};
  std::vector<double> u, v;
  std::string line;
  int line_no = 0;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (axes.size() < 4) {
      axes.push_back(parse_axis_line(line, line_no, axis_names[axes.size()]));
      if (axes.size() == 4) {
        expected = axes[0].size() * axes[1].size() * axes[2].size() *
                   axes[3].size();
        u.reserve(expected);
        v.reserve(expected);
      }
      continue;
    }
    std::istringstream is(line);
    double uu, vv;
    if (!(is >> uu >> vv)) {
      throw WindParseError("line " + std::to_string(line_no) +
                           ": expected 'u v' cell values");
    }
    std::string extra;
    if (is >> extra) {
      throw WindParseError("line " + std::to_string(line_no) +
                           ": trailing data after cell values");
    }
    if (std::isnan(uu) || std::isnan(vv)) {
      throw WindParseError("line " + std::to_string(line_no) +
                           ": NaN cell value");
    }
    u.push_back(uu);
    v.push_back(vv);
    if (u.size() > expected) {
      throw WindParseError("line " + std::to_string(line_no) +
                           ": more cells than the axes imply (" +
                           std::to_string(expected) + ")");
    }
  }
  if (axes.size() < 4) {
    throw WindParseError("truncated file: only " + std::to_string(axes.size()) +
                         " of 4 axis lines present");
  }
  if (u.size() != expected) {
    throw WindParseError("truncated file: " + std::to_string(u.size()) +
                         " of " + std::to_string(expected) + " cells present");
  }
  return std::make_shared<GriddedWindModel>(axes[0], axes[1], axes[2], axes[3],
                                            std::move(u), std::move(v), v_max);
}

std::shared_ptr<LayeredWindModel> make_uniform_wind(double bearing_rad,
                                                    double speed_mps,
                                                    double v_max) {
  std::vector<WindLayer> layers{{20000.0, bearing_rad, speed_mps, 20000.0}};
  return std::make_shared<LayeredWindModel>(std::move(layers), v_max);
}

std::shared_ptr<LayeredWindModel> make_opposing_wind(double speed_mps,
                                                     double v_max) {
  std::vector<WindLayer> layers{
      {16500.0, 0.0, speed_mps, 9000.0},
      {23500.0, M_PI, speed_mps, 9000.0},
  };
  return std::make_shared<LayeredWindModel>(std::move(layers), v_max);
}

std::shared_ptr<LayeredWindModel> make_compass_wind(double speed_mps,
                                                    double v_max) {
  std::vector<WindLayer> layers{
      {15500.0, 0.0, speed_mps, 3200.0},
      {18200.0, M_PI / 2.0, speed_mps, 3200.0},
      {21300.0, M_PI, speed_mps, 3200.0},
      {24400.0, 3.0 * M_PI / 2.0, speed_mps, 3200.0},
  };
  return std::make_shared<LayeredWindModel>(std::move(layers), v_max);
}

std::shared_ptr<LayeredWindModel> make_random_layered(std::uint64_t seed,
                                                      int n_layers,
                                                      double min_speed,
                                                      double max_speed,
                                                      double v_max) {
  if (n_layers < 1) throw std::invalid_argument("n_layers must be >= 1");
  Rng rng = Rng::substream(seed, 2, 0, StreamPurpose::kWind);
  std::vector<WindLayer> layers;
  layers.reserve(static_cast<std::size_t>(n_layers));
  double band = (kAltMaxM - kAltMinM) / n_layers;
  for (int i = 0; i < n_layers; ++i) {
    WindLayer l;
    double lo = kAltMinM + band * i;
    l.center_alt_m = rng.uniform(lo + 0.2 * band, lo + 0.8 * band);
    l.bearing_rad = rng.uniform(0.0, 2.0 * M_PI);
    l.speed_mps = rng.uniform(min_speed, max_speed);
    l.extent_m = band * rng.uniform(1.0, 1.8);
    l.bearing_rate_rad_per_min = rng.uniform(-1.0, 1.0) * 2e-4;
    l.speed_rate_mps_per_min = rng.uniform(-1.0, 1.0) * 5e-4;
    layers.push_back(l);
  }
  return std::make_shared<LayeredWindModel>(std::move(layers), v_max, seed);
}

std::vector<WindLayer> parse_layers_text(const std::string& text) {
  std::vector<WindLayer> layers;
  std::istringstream records(text);
  std::string rec;
  while (std::getline(records, rec, ';')) {
    if (rec.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> f;
    std::istringstream fields(rec);
    std::string cell;
    while (std::getline(fields, cell, ',')) f.push_back(std::stod(cell));
    if (f.size() < 4 || f.size() > 6) {
      throw std::invalid_argument(
          "layer record needs 4-6 fields (alt,bearing,speed,extent[,brate,srate]): " +
          rec);
    }
    WindLayer l;
    l.center_alt_m = f[0];
    l.bearing_rad = f[1];
    l.speed_mps = f[2];
    l.extent_m = f[3];
    if (f.size() > 4) l.bearing_rate_rad_per_min = f[4];
    if (f.size() > 5) l.speed_rate_mps_per_min = f[5];
    layers.push_back(l);
  }
  if (layers.empty()) throw std::invalid_argument("empty layer list");
  return layers;
}

std::string layers_to_text(const std::vector<WindLayer>& layers) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) os << ';';
    const auto& l = layers[i];
    os << l.center_alt_m << ',' << l.bearing_rad << ',' << l.speed_mps << ','
       << l.extent_m << ',' << l.bearing_rate_rad_per_min << ','
       << l.speed_rate_mps_per_min;
  }
  return os.str();
}

std::shared_ptr<const WindModel> WindSpec::build_truth() const {
  if (truth == "uniform") {
    return make_uniform_wind(uniform_bearing_rad, uniform_speed_mps, v_max);
  }
  if (truth == "opposing") return make_opposing_wind(opposing_speed_mps, v_max);
  if (truth == "compass") return make_compass_wind(compass_speed_mps, v_max);
  if (truth == "random") {
    return make_random_layered(seed, random_layers, 2.0, 12.0, v_max);
  }
  if (truth == "layers") {
    return std::make_shared<LayeredWindModel>(parse_layers_text(layers), v_max,
                                              seed);
  }
  if (truth == "gridded") return load_gridded_wind(file, v_max);
  throw std::invalid_argument("unknown wind.truth kind: " + truth);
}

std::shared_ptr<const WindModel> WindSpec::build_forecast(
    std::shared_ptr<const WindModel> truth_model) const {
  if (forecast_bearing_sd_rad == 0.0 && forecast_speed_sd_mps == 0.0) {
    return truth_model;
  }
  return std::make_shared<ForecastModel>(std::move(truth_model),
                                         forecast_bearing_sd_rad,
                                         forecast_speed_sd_mps,
                                         forecast_corr_len_m, forecast_seed);
}

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> WindSpec::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["wind.truth"] = truth;
  kv["wind.v_max"] = fmt_double(v_max);
  kv["wind.seed"] = std::to_string(seed);
  if (truth == "uniform") {
    kv["wind.uniform_bearing"] = fmt_double(uniform_bearing_rad);
    kv["wind.uniform_speed"] = fmt_double(uniform_speed_mps);
  } else if (truth == "opposing") {
    kv["wind.opposing_speed"] = fmt_double(opposing_speed_mps);
  } else if (truth == "compass") {
    kv["wind.compass_speed"] = fmt_double(compass_speed_mps);
  } else if (truth == "random") {
    kv["wind.random_layers"] = std::to_string(random_layers);
  } else if (truth == "layers") {
    kv["wind.layers"] = layers;
  } else if (truth == "gridded") {
    kv["wind.file"] = file;
  }
  kv["forecast.bearing_sd"] = fmt_double(forecast_bearing_sd_rad);
  kv["forecast.speed_sd"] = fmt_double(forecast_speed_sd_mps);
  kv["forecast.corr_len"] = fmt_double(forecast_corr_len_m);
  kv["forecast.seed"] = std::to_string(forecast_seed);
  return kv;
}

WindSpec WindSpec::from_kv(const std::map<std::string, std::string>& kv) {
  WindSpec s;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("wind.truth")) s.truth = *v;
  if (auto* v = get("wind.v_max")) s.v_max = std::stod(*v);
  if (auto* v = get("wind.seed")) s.seed = std::stoull(*v);
  if (auto* v = get("wind.uniform_bearing")) s.uniform_bearing_rad = std::stod(*v);
  if (auto* v = get("wind.uniform_speed")) s.uniform_speed_mps = std::stod(*v);
  if (auto* v = get("wind.opposing_speed")) s.opposing_speed_mps = std::stod(*v);
  if (auto* v = get("wind.compass_speed")) s.compass_speed_mps = std::stod(*v);
  if (auto* v = get("wind.random_layers")) s.random_layers = std::stoi(*v);
  if (auto* v = get("wind.layers")) s.layers = *v;
  if (auto* v = get("wind.file")) s.file = *v;
  if (auto* v = get("forecast.bearing_sd")) s.forecast_bearing_sd_rad = std::stod(*v);
  if (auto* v = get("forecast.speed_sd")) s.forecast_speed_sd_mps = std::stod(*v);
  if (auto* v = get("forecast.corr_len")) s.forecast_corr_len_m = std::stod(*v);
  if (auto* v = get("forecast.seed")) s.forecast_seed = std::stoull(*v);
  return s;
}

}  // namespace habcov
