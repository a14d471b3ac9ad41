#ifndef STANCE_HASH_H_
#define STANCE_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace stance {

// 64-bit FNV-1a. Used for example ids, feature buckets and config digests,
// so its output is part of the file formats and must never change.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t Fnv1a64(std::string_view data,
                                std::uint64_t h = kFnvOffset) {
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

// Hashes a sequence of fields with a unit separator (0x1F) between them so
// ("ab","c") and ("a","bc") differ.
class FieldHasher {
 public:
  FieldHasher& Add(std::string_view field) {
    if (!first_) h_ = Fnv1a64("\x1f", h_);
    first_ = false;
    h_ = Fnv1a64(field, h_);
    return *this;
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = kFnvOffset;
  bool first_ = true;
};

std::string ToHex16(std::uint64_t v);

// splitmix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace stance

#endif  // STANCE_HASH_H_
