#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace habcov {

// Purpose tags for deriving named substreams. Adding agents or purposes must
// not perturb draws of existing streams, so every stream is keyed by
// (master, a, b, purpose) rather than drawn from a shared sequence.
enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kVertical = 2,
  kExplore = 3,
  kSampler = 4,
  kNetInit = 5,
  kWind = 6,
  kMisc = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t h, std::uint64_t x) {
  return splitmix64(h ^ (x + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

// Deterministic RNG stream. The engine is std::mt19937_64 (bit-exact output
// per the standard); distributions are implemented here because the stdlib
// ones are implementation-defined and would break cross-platform replay.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng substream(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                       StreamPurpose purpose) {
    std::uint64_t k = splitmix64(master);
    k = mix_key(k, a);
    k = mix_key(k, b);
    k = mix_key(k, static_cast<std::uint64_t>(purpose));
    return Rng(k);
  }

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; two uniforms per draw, no cached spare (keeps the stream
  // state equal to the engine state, which simplifies serialization).
  double normal(double mean, double sd) {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sd * z;
  }

  // Unbiased integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace habcov
