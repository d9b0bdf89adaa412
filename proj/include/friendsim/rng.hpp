#pragma once

#include <cstdint>
#include <string_view>

namespace friendsim {

// Splittable deterministic generator. The algorithm identifier goes into
// every report so a trace can be reproduced outside this codebase.
//
// splitmix64: state advances by the 64-bit golden ratio, output is the
// mixed state (Steele, Lea, Flood 2014). Sub-stream i of a master seed s
// starts at state s + (i+1)*0x9E3779B97F4A7C15 and takes one output step;
// distinct runs therefore sit at distinct points of one underlying Weyl
// sequence and never share a stream prefix.
inline constexpr std::string_view kRngAlgorithm = "splitmix64-v1";

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1), 53 bits, exact integer arithmetic then one division:
  // bit-identical across conforming platforms.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t subseed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 g(master + (index + 1) * 0x9E3779B97F4A7C15ull);
  return g.next_u64();
}

}  // namespace friendsim
