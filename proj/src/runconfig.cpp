#include "habcov/runconfig.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace habcov {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!section.empty()) key = section + "." + key;
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> baseline_to_kv(const BaselineConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["baseline.lloyd_iterations"] = std::to_string(cfg.lloyd_iterations);
  kv["baseline.grid_km"] = fmt(cfg.grid_km);
  kv["baseline.refresh_minutes"] = std::to_string(cfg.refresh_minutes);
  kv["baseline.v_cap"] = fmt(cfg.v_cap_mps);
  kv["baseline.deadband_m"] = fmt(cfg.deadband_m);
  kv["baseline.arrival_km"] = fmt(cfg.arrival_km);
  return kv;
}

BaselineConfig baseline_from_kv(const std::map<std::string, std::string>& kv) {
  BaselineConfig c;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("baseline.lloyd_iterations")) c.lloyd_iterations = std::stoi(*v);
  if (auto* v = get("baseline.grid_km")) c.grid_km = std::stod(*v);
  if (auto* v = get("baseline.refresh_minutes")) c.refresh_minutes = std::stoi(*v);
  if (auto* v = get("baseline.v_cap")) c.v_cap_mps = std::stod(*v);
  if (auto* v = get("baseline.deadband_m")) c.deadband_m = std::stod(*v);
  if (auto* v = get("baseline.arrival_km")) c.arrival_km = std::stod(*v);
  return c;
}

std::map<std::string, std::string> RunConfig::to_kv() const {
  std::map<std::string, std::string> kv = env.to_kv();
  auto t = train.to_kv();
  kv.insert(t.begin(), t.end());
  auto b = baseline_to_kv(baseline);
  kv.insert(b.begin(), b.end());
  kv["run.out"] = out_dir;
  std::ostringstream ss;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) ss << ' ';
    ss << seeds[i];
  }
  kv["run.seeds"] = ss.str();
  return kv;
}

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& kv) {
  // Key whitelisting: anything the round-trip would not emit is a typo. The
  // wind keys vary with the truth kind, so accept every kind's keys.
  static const std::set<std::string> extra_wind_keys = {
      "wind.uniform_bearing", "wind.uniform_speed", "wind.opposing_speed",
      "wind.compass_speed",   "wind.random_layers", "wind.layers",
      "wind.file"};
  RunConfig defaults;
  auto known = defaults.to_kv();
  for (const auto& [k, v] : kv) {
    if (!known.count(k) && !extra_wind_keys.count(k)) {
      throw ConfigError("unknown config key: " + k);
    }
  }
  RunConfig cfg;
  try {
    cfg.env = EnvConfig::from_kv(kv);
    cfg.train = TrainConfig::from_kv(kv);
    cfg.baseline = baseline_from_kv(kv);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (auto it = kv.find("run.out"); it != kv.end() && !it->second.empty()) {
    cfg.out_dir = it->second;
  }
  if (auto it = kv.find("run.seeds"); it != kv.end()) {
    std::istringstream is(it->second);
    std::uint64_t s;
    cfg.seeds.clear();
    while (is >> s) cfg.seeds.push_back(s);
  }
  return cfg;
}

void RunConfig::validate() const {
  try {
    env.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (baseline.lloyd_iterations < 1) throw ConfigError("baseline.lloyd_iterations must be >= 1");
  if (!(baseline.grid_km > 0.0)) throw ConfigError("baseline.grid_km must be > 0");
  if (baseline.refresh_minutes < 1) throw ConfigError("baseline.refresh_minutes must be >= 1");
}

void RunConfig::echo(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write resolved config: " + path);
  for (const auto& [k, v] : to_kv()) out << k << " = " << v << '\n';
}

std::string dump_default_config() {
  RunConfig cfg;
  std::ostringstream os;
  std::string section;
  for (const auto& [k, v] : cfg.to_kv()) {
    std::size_t dot = k.find('.');
    std::string sec = k.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << k.substr(dot + 1) << " = " << v << '\n';
  }
  return os.str();
}

}  // namespace habcov
