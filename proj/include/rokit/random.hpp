// Copyright 2026 The rokit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROKIT_RANDOM_HPP
#define ROKIT_RANDOM_HPP

#include <array>
#include <cstdint>

namespace rokit {

// Philox4x32-10 block function. Maps a 128-bit counter and a 64-bit key to
// 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based random source. The value at draw index i depends only on
// (seed, stream_id, i), so results do not depend on scheduling or thread count.
class RandomStream {
 public:
  RandomStream() = default;
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t draws() const { return counter_; }

  // 64 random bits for the current draw index.
  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // true with probability p; consumes no draw when p <= 0 or p >= 1.
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  // Standard normal deviate (Box-Muller, two draws).
  double normal();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

inline double draw(RandomStream& stream) { return stream.uniform(); }

// Stream-id namespaces so that different consumers of one seed never overlap.
namespace stream_domain {
inline constexpr std::uint64_t kSequences = 0x1ull << 60;
inline constexpr std::uint64_t kShots = 0x2ull << 60;
inline constexpr std::uint64_t kRestarts = 0x3ull << 60;
inline constexpr std::uint64_t kNoise = 0x4ull << 60;
inline constexpr std::uint64_t kBootstrap = 0x5ull << 60;
}  // namespace stream_domain

}  // namespace rokit

#endif  // ROKIT_RANDOM_HPP
