#pragma once

#include <map>
#include <string>
#include <vector>

#include "habcov/environment.hpp"
#include "habcov/qmix.hpp"
#include "habcov/voronoi.hpp"

namespace habcov {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` file with `[section]` headers; keys resolve to
// "section.key". `#` starts a comment.
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct RunConfig {
  EnvConfig env;
  TrainConfig train;
  BaselineConfig baseline;
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds;

  std::map<std::string, std::string> to_kv() const;
  // Rejects keys that are not produced by to_kv (error names the key).
  static RunConfig from_kv(const std::map<std::string, std::string>& kv);

  void validate() const;
  void echo(const std::string& path) const;
};

std::string dump_default_config();

std::map<std::string, std::string> baseline_to_kv(const BaselineConfig& cfg);
BaselineConfig baseline_from_kv(const std::map<std::string, std::string>& kv);

}  // namespace habcov
