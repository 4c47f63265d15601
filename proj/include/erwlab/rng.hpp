#ifndef ERWLAB_RNG_HPP
#define ERWLAB_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace erwlab {

// splitmix64 finalizer, used both as a mixer and as a tiny stream generator
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-style seed derivation: the replicate seed is a pure function of
// (master seed, stream label, replicate index), so parallel streams need no
// coordination and results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index) {
  std::uint64_t h = mix64(master ^ fnv1a64(label));
  return mix64(h + 0x9e3779b97f4a7c15ULL * (index + 1));
}

// mt19937_64 with a fixed uint64 -> [0,1) mapping. The engine's output
// sequence is pinned by the standard, so trajectories are stable across
// platforms and library versions (std distributions are not, so we avoid
// them).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // unbiased integer in [0, n)
  std::uint32_t below(std::uint32_t n) {
    std::uint64_t threshold = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= threshold);
    return static_cast<std::uint32_t>(x % n);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace erwlab

#endif
