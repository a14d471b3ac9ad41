#ifndef STANCE_RNG_H_
#define STANCE_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace stance {

// Seeded generator whose output is identical on every conforming platform.
// std::mt19937_64 is fully specified by the standard; the distributions are
// not, so bounded draws and coin flips are implemented here on raw words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t Uniform(std::uint64_t bound);

  // True with probability p, quantized to multiples of 2^-32. Always
  // consumes exactly one word so stream alignment is independent of p.
  bool Bernoulli(double p);

  // Uniform double in [0, 1) with 53 random bits.
  double UniformReal() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Fisher-Yates shuffle driven by Uniform().
  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(Uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct indices from [0, n), ascending.
  std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k);

  // Independent child generator keyed by a name; the parent is not advanced.
  Rng Derive(std::string_view name) const;
  Rng Derive(std::uint64_t key) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// Probability in [0,1] as an integer threshold out of 2^32.
std::uint64_t ProbabilityToThreshold(double p);

}  // namespace stance

#endif  // STANCE_RNG_H_
