#pragma once

#include <cstdint>
#include <string_view>

namespace overiva {

// xoshiro256** 1.0 (Blackman & Vigna), state seeded from one 64-bit value by
// four splitmix64 steps. uniform() takes the top 53 bits; normal() is
// Box-Muller over two uniforms, returning the cosine branch then the cached
// sine branch. Fully specified so other implementations can reproduce scenes.
class Xoshiro256 {
 public:
  static constexpr std::string_view kName = "xoshiro256**";

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  double uniform() noexcept;  // [0, 1)
  double normal() noexcept;   // N(0, 1)
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace overiva
