// Copyright 2026 The SLDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLDP_RNG_HPP_
#define SLDP_RNG_HPP_

#include <cstdint>
#include <limits>

namespace sldp {

namespace internal {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace internal

// Counter-based random stream keyed by (seed, stream id).
//
// The i-th output is a fixed function of (seed, stream, i), so any stream can
// be re-created from its two ids and replayed bit-for-bit. Protocol runs use
// one stream per (trial, user, round) via Substream(). Satisfies
// UniformRandomBitGenerator, so it plugs into <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed),
        stream_(stream),
        key_(internal::Mix64(seed ^ internal::Mix64(stream + internal::kGolden))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return internal::Mix64(key_ + counter_ * internal::kGolden);
  }

  // Uniform double on the open interval (0, 1).
  double Uniform01() {
    for (;;) {
      const double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  // Independent child stream identified by (a, b) under the same seed.
  RngStream Substream(std::uint64_t a, std::uint64_t b = 0) const {
    std::uint64_t id = internal::Mix64(stream_ + internal::kGolden * (a + 1));
    id = internal::Mix64(id ^ (internal::kGolden * (b + 1) + 0x632be59bd9b4e019ULL));
    return RngStream(seed_, id);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sldp

#endif  // SLDP_RNG_HPP_
