//
// Copyright 2026 The PrivTree Authors
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
//

#ifndef PRIVTREE_RANDOM_H_
#define PRIVTREE_RANDOM_H_

#include <cstdint>
#include <random>

namespace privtree {

// Seeded random stream. The engine is a 64-bit Mersenne twister; uniforms are
// built from the top 53 bits by hand so that draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double Uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  uint64_t UniformInt(uint64_t n);

  // Derives an independent stream for `stream_id` by hashing it together with
  // the seed of this stream (counter-based splitting). Does not advance *this.
  Rng Split(uint64_t stream_id) const;

  uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  uint64_t seed_;
};

// SplitMix64 finalizer, used to decorrelate derived seeds.
uint64_t MixSeed(uint64_t x);

}  // namespace privtree

#endif  // PRIVTREE_RANDOM_H_
