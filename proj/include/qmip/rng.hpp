#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>

namespace qmip {

// All randomness in the library flows from a single root seed through named
// sub-streams: substream(seed, "label", indices...) gives an independent,
// reproducible generator regardless of the order in which other streams are
// consumed. Distribution transforms are hand-rolled on top of the raw 64-bit
// output so results do not depend on the standard library's unspecified
// implementations of uniform_real/normal distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), bound >= 1, without modulo bias.
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_int: bound must be >= 1");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  // Standard normal via Box-Muller (cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Complex standard normal: independent N(0, 1/2) real and imaginary parts,
  // so E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double s = 0.70710678118654752440;
    return {s * normal(), s * normal()};
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {

// FNV-1a over the label and indices, mixed with the root seed. Only used to
// key sub-streams; not a cryptographic hash.
inline std::uint64_t stream_key(std::uint64_t seed, std::string_view label,
                                std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  auto mix_byte = [&h](unsigned char b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  for (char c : label) mix_byte(static_cast<unsigned char>(c));
  for (std::uint64_t v : indices) {
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  // splitmix64 finalizer to spread low-entropy labels over the full state.
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace detail

inline Rng substream(std::uint64_t seed, std::string_view label) {
  return Rng(detail::stream_key(seed, label, {}));
}
inline Rng substream(std::uint64_t seed, std::string_view label, std::uint64_t a) {
  return Rng(detail::stream_key(seed, label, {a}));
}
inline Rng substream(std::uint64_t seed, std::string_view label, std::uint64_t a,
                     std::uint64_t b) {
  return Rng(detail::stream_key(seed, label, {a, b}));
}
inline Rng substream(std::uint64_t seed, std::string_view label, std::uint64_t a,
                     std::uint64_t b, std::uint64_t c) {
  return Rng(detail::stream_key(seed, label, {a, b, c}));
}

}  // namespace qmip
