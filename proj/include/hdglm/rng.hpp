// Self-contained counter-based RNG. Everything stochastic in the library
// draws from this generator so results are bit-reproducible across
// platforms and independent of the standard library's distributions.
#pragma once

#include <cmath>
#include <cstdint>

namespace hdglm {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// Finalizer from splitmix64.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream derivation scheme: stream k of a base seed is the splitmix64 mix
// of (seed + (k+1)*golden). Independent streams for parallel replications
// are obtained by giving each unit of work its own counter k.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t k) {
  return mix64(seed + kGolden * (k + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform on [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1]; safe under log().
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, one spare cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Unit-rate exponential.
  double exponential() { return -std::log(uniform_pos()); }

  // Poisson count by the inverse-transform of a unit-rate process: the
  // number of interarrival sums that stay within `rate`.
  long poisson(double rate) {
    long k = 0;
    double t = exponential();
    while (t <= rate) {
      ++k;
      t += exponential();
    }
    return k;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hdglm
