// Deterministic random number generation for the ensemble.
//
// The simulator's reproducibility contract is byte-level: the same
// (master_seed, run_index) must yield the same plan on any platform, any
// optimization level, and any worker count. std::mt19937 plus the standard
// distributions cannot promise that (distribution implementations vary), so
// the generator and the bounded-draw helper are pinned here.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace rps {

// SplitMix64: 64-bit state, bijective stream; used for seeding only.
struct SplitMix64 {
  std::uint64_t state;

  constexpr explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256** — fast, well-tested 256-bit generator.
struct Xoshiro256ss {
  std::array<std::uint64_t, 4> s{};

  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  // Stream derivation: run_index is folded into the master seed through a
  // bijection (multiplication by an odd constant, then XOR), so within one
  // master seed every run_index starts SplitMix64 at a distinct state, and
  // the four warm-up outputs that fill the state are therefore distinct
  // streams. Counter-based: no generator state is shared between runs.
  static Xoshiro256ss from_stream(std::uint64_t master_seed,
                                  std::uint64_t run_index) {
    SplitMix64 root(master_seed);
    const std::uint64_t base = root.next();
    SplitMix64 mix(base ^ (run_index * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL));
    Xoshiro256ss r;
    for (auto& word : r.s) word = mix.next();
    return r;
  }

  constexpr std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

// Unbiased draw from {0, 1, ..., n-1} by threshold rejection. For n == 1 no
// entropy is consumed — callers rely on that: deterministic picks never
// advance the stream.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::domain_error("uniform_below: empty range");
  if (n == 1) return 0;
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng.next();
    if (x >= threshold) return x % n;
  }
}

}  // namespace rps
