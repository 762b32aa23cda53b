#pragma once

#include <cstdint>
#include <cmath>

namespace addfit {

// Deterministic substream RNG. Each (master seed, rep, role) pair names an
// independent stream, so adding a consumer never perturbs another stream.
// All transforms are implemented here so that draws are identical across
// platforms and standard library versions.
enum class StreamRole : std::uint64_t { X = 1, U = 2, Alpha = 3, Eps = 4, Contam = 5 };

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t rep,
                                    StreamRole role) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= rep * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull;
  std::uint64_t b = splitmix64(s);
  s ^= static_cast<std::uint64_t>(role) * 0xda942042e4dd58b5ull;
  std::uint64_t c = splitmix64(s);
  return a ^ (b * 0x2545f4914f6cdd1dull) ^ c;
}

class SubstreamRng {
public:
  explicit SubstreamRng(std::uint64_t seed) : state_(seed ? seed : 0x6a09e667f3bcc909ull) {}

  SubstreamRng(std::uint64_t master, std::uint64_t rep, StreamRole role)
      : SubstreamRng(substream_seed(master, rep, role)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform on (0, 1).
  double uniform() {
    for (;;) {
      double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
      if (u > 0.0 && u < 1.0) return u;
    }
  }

  /// Standard normal, Box-Muller with one cached value.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Standard Laplace (density exp(-|x|)/2), by inverse CDF.
  double laplace() {
    double u = uniform();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
  }

private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace addfit
