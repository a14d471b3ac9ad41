#include "stance/rng.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stance/hash.h"

namespace stance {

std::string ToHex16(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
    v >>= 4;
  }
  return out;
}

std::uint64_t Rng::Uniform(std::uint64_t bound) {
  // Rejection sampling on the largest multiple of bound.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> Rng::SampleIndices(std::size_t n, std::size_t k) {
  k = std::min(k, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(Uniform(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Rng Rng::Derive(std::string_view name) const {
  return Rng(Mix64(seed_ ^ Fnv1a64(name)));
}

Rng Rng::Derive(std::uint64_t key) const {
  return Rng(Mix64(seed_ ^ Mix64(key)));
}

std::uint64_t ProbabilityToThreshold(double p) {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return std::uint64_t{1} << 32;
  return static_cast<std::uint64_t>(std::llround(p * 4294967296.0));
}

bool Rng::Bernoulli(double p) {
  const std::uint64_t draw = engine_() >> 32;
  return draw < ProbabilityToThreshold(p);
}

}  // namespace stance
