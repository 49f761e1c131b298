#pragma once

#include <cstdint>
#include <limits>

namespace sublin::sim {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// xoshiro256++ keyed by (seed, path, stream). Each path owns its own substreams,
/// so results do not depend on how paths are spread over workers.
class PathRng {
 public:
  using result_type = std::uint64_t;

  PathRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) noexcept {
    std::uint64_t key = splitmix64(seed) ^ splitmix64(path * 0xd1b54a32d192ed03ULL + 1) ^
                        splitmix64(stream * 0xaef17502108ef2d9ULL + 2);
    for (auto& s : s_) {
      key = splitmix64(key);
      s = key;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Fair sign, drawn from a buffered 64-bit word.
  double sign() noexcept {
    if (bits_left_ == 0) {
      bits_ = (*this)();
      bits_left_ = 64;
    }
    const double s = (bits_ & 1u) ? 1.0 : -1.0;
    bits_ >>= 1;
    --bits_left_;
    return s;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
};

}  // namespace sublin::sim
