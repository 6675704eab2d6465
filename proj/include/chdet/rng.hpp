// Copyright 2026 The chdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chdet {

/// Counter-based pseudo-random generator (splitmix64 core).
///
/// Every random decision in the toolkit flows through this type so that a
/// fixed integer seed reproduces the same bytes on every run and platform.
/// Child streams derived with fork() are independent of how much the parent
/// has been consumed, which keeps parallel data loading order-insensitive.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling, exactly unbiased.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> countl_zero_(n - 1);
        for (;;) {
            std::uint64_t v = next_u64() & mask;
            if (v < n) return v;
        }
    }

    /// Standard normal via Box-Muller (no caching, two draws per call).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // uniform() can return exactly 0; push it off the log singularity.
        u1 = (u1 > 0.0) ? u1 : 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Child stream keyed by `tag`; depends on the seed only, not on how many
    /// values the parent has produced so far.
    Rng fork(std::uint64_t tag) const { return Rng(mix(state_, tag)); }

    /// Deterministic 64-bit hash of two words, used for seed derivation and
    /// the position-independent validation split.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    static int countl_zero_(std::uint64_t x) {
        int n = 0;
        for (std::uint64_t probe = std::uint64_t{1} << 63; probe && !(x & probe); probe >>= 1) ++n;
        return n;
    }

    std::uint64_t state_;
};

} // namespace chdet
