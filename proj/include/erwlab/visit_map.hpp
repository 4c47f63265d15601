#ifndef ERWLAB_VISIT_MAP_HPP
#define ERWLAB_VISIT_MAP_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "erwlab/errors.hpp"
#include "erwlab/rng.hpp"

namespace erwlab {

// Walk support is sparse in Z^d, so visit counts live in an open-addressing
// hash table keyed by packed coordinates. Each coordinate gets 128/d bits
// (zig-zag encoded); the per-coordinate bound that makes packing injective is
// enforced by the simulator.

inline int coord_bits(int d) { return 128 / d; }

inline std::int64_t coord_limit(int d) {
  int b = coord_bits(d);
  if (b >= 63) return (std::int64_t{1} << 62) - 1;
  return (std::int64_t{1} << (b - 1)) - 1;
}

inline std::uint64_t zigzag64(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^
         static_cast<std::uint64_t>(v >> 63);
}

struct Key128 {
  std::uint64_t lo = 0, hi = 0;
  friend bool operator==(const Key128&, const Key128&) = default;
};

inline Key128 pack_point(std::span<const std::int64_t> p) {
  const int d = static_cast<int>(p.size());
  const int bits = coord_bits(d);
  unsigned __int128 k = 0;
  for (int j = 0; j < d; ++j) k = (k << bits) | zigzag64(p[j]);
  return Key128{static_cast<std::uint64_t>(k),
                static_cast<std::uint64_t>(k >> 64)};
}

inline std::uint64_t hash_key(const Key128& k) {
  return mix64(k.lo ^ mix64(k.hi));
}

class VisitMap {
 public:
  explicit VisitMap(std::size_t expected = 64) {
    std::size_t cap = 16;
    while (cap * 5 < expected * 8) cap <<= 1;
    slots_.resize(cap);
  }

  void clear() {
    ++stamp_;
    size_ = 0;
    if (stamp_ == 0) {  // stamp wrapped; wipe everything once
      std::fill(slots_.begin(), slots_.end(), Slot{});
      stamp_ = 1;
    }
  }

  // Insert-or-bump; returns visit count prior to this arrival.
  std::uint32_t increment(const Key128& k) {
    if ((size_ + 1) * 8 > slots_.size() * 5) grow();
    std::size_t i = probe(k);
    Slot& s = slots_[i];
    if (s.stamp != stamp_) {
      s = Slot{k.lo, k.hi, stamp_, 1};
      ++size_;
      return 0;
    }
    return s.count++;
  }

  std::uint32_t count(const Key128& k) const {
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash_key(k) & mask;
    while (true) {
      const Slot& s = slots_[i];
      if (s.stamp != stamp_) return 0;
      if (s.lo == k.lo && s.hi == k.hi) return s.count;
      i = (i + 1) & mask;
    }
  }

  std::size_t distinct() const { return size_; }

  std::uint64_t total_mass() const {
    std::uint64_t t = 0;
    for (const Slot& s : slots_)
      if (s.stamp == stamp_) t += s.count;
    return t;
  }

 private:
  struct Slot {
    std::uint64_t lo = 0, hi = 0;
    std::uint32_t stamp = 0;
    std::uint32_t count = 0;
  };

  std::size_t probe(const Key128& k) const {
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash_key(k) & mask;
    while (true) {
      const Slot& s = slots_[i];
      if (s.stamp != stamp_ || (s.lo == k.lo && s.hi == k.hi)) return i;
      i = (i + 1) & mask;
    }
  }

  void grow() {
    std::vector<Slot> old;
    old.swap(slots_);
    slots_.resize(old.size() * 2);
    for (const Slot& s : old) {
      if (s.stamp != stamp_) continue;
      std::size_t i = probe(Key128{s.lo, s.hi});
      slots_[i] = s;
    }
  }

  std::vector<Slot> slots_;
  std::uint32_t stamp_ = 1;
  std::size_t size_ = 0;
};

}  // namespace erwlab

#endif
