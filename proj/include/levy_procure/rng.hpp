#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace levy_procure {

// Random streams are keyed by (seed, stream, path). The key is hashed with
// SplitMix64 into the 256-bit state of a xoshiro256++ generator, so path i of
// a run is reproducible from (seed, i) alone, whatever the thread layout.
namespace stream {
inline constexpr std::uint64_t kPrice = 0;     // grid increments, jump counts and sizes
inline constexpr std::uint64_t kEvents = 1;    // demand time, demand size, exponential horizons
inline constexpr std::uint64_t kExtremum = 2;  // bridge extrema and in-step jump times
}  // namespace stream

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0, std::uint64_t path = 0) {
    std::uint64_t h = seed;
    std::uint64_t key = splitmix64(h);
    key ^= 0xd1b54a32d192ed03ULL * (stream_id + 1);
    key = splitmix64(key);
    key ^= 0x8cb92ba72f3d8dd7ULL * (path + 1);
    for (auto& word : state_) word = splitmix64(key);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Poisson by inversion; large means are split into independent pieces.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(std::exp(-30.0));
      mean -= 30.0;
    }
    return total + poisson_small(std::exp(-mean));
  }

  // Same as poisson() when exp(-mean) is already known and mean <= 30.
  std::uint64_t poisson_small(double exp_minus_mean) {
    std::uint64_t k = 0;
    double p = uniform();
    while (p > exp_minus_mean) {
      p *= uniform();
      ++k;
    }
    return k;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace levy_procure
