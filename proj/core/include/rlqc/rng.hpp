// Copyright 2026 The rlqc Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace rlqc {

/// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic random stream.
///
/// The engine is std::mt19937_64 (whose output sequence is fixed by the
/// standard) seeded with splitmix64(seed). Floating point and integer
/// conversions are implemented here rather than with <random> distributions,
/// whose algorithms are implementation-defined, so a seed reproduces the same
/// samples bit-exactly with any standard library.
///
/// A stream is single-owner. Use `split` to hand independent streams to workers.
class RngStream {
   public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {
    }

    std::uint64_t seed() const {
        return seed_;
    }

    std::uint64_t next_u64() {
        return engine_();
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Unbiased (rejection on the top range).
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via the Box-Muller transform (pairs are cached).
    double normal();

    /// Independent child stream identified by `stream_id`.
    RngStream split(std::uint64_t stream_id) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL)));
    }

   private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace rlqc
