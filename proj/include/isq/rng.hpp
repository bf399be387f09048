#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace isq {

// splitmix64, used to decorrelate derived stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. All randomness in the library flows through
// this wrapper so that results are a pure function of the seed values; worker
// streams are derived from (seed, stream, chunk) and never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    s ^= chunk * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t c = splitmix64(s);
    return Rng(a ^ (b << 1) ^ (c << 2));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1): 53 mantissa bits, engine-exact.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Marsaglia polar, second deviate cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Exponential with rate a (mean 1/a).
  double exponential(double a) { return -std::log1p(-uniform()) / a; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace isq
