#pragma once

#include <cstdint>
#include <cstring>
#include <span>

namespace sublin {

/// FNV-1a over the raw bytes of a run of doubles; used to compare aggregates bit for bit.
class Digest {
 public:
  void add(double v) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(std::span<const double> vs) {
    for (double v : vs) add(v);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace sublin
