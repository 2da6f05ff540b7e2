#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace orgsift {

// 64-bit finalizer (splitmix64) used to derive independent stream seeds from
// one base seed. Pure arithmetic, identical on every platform.
constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for (base, stream, index). Streams keep sampling, shuffling and
// generation decoupled so adding draws to one never shifts another.
constexpr uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index) {
  return splitmix64(splitmix64(base ^ (0x6a09e667f3bcc909ULL + stream)) + index);
}

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// bounded samplers below replace the implementation-defined std::uniform_*
// distributions so sequences are identical across compilers.
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // Uniform in [0, n). Fixed-point multiply, no rejection.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double range(double lo, double hi) { return lo + unit() * (hi - lo); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace orgsift
