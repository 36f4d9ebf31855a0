#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace vitcolor {

/// Seedable random stream used everywhere randomness is needed (weight init,
/// shuffling, dropout, noise). Wraps mt19937_64 but implements the
/// distributions itself so a stream is fully described by the engine state:
/// save_state()/load_state() round-trips give bitwise-identical continuations,
/// which checkpoint resume relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_int: n must be > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % n;
  }

  /// Standard normal via Box-Muller. Draws two uniforms per call and keeps no
  /// cached spare, so the stream state alone determines every future value.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[uniform_int(i)]);
    }
  }

  std::string save_state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    if (is.fail()) throw std::runtime_error("Rng::load_state: malformed state string");
  }

  /// Mixes (seed, stream) into an independent sub-stream seed (splitmix64).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace vitcolor
