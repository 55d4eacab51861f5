// SPDX-License-Identifier: Apache-2.0
//
// Counter-based RNG substreams (splitmix64) with portable Box-Muller
// normals. Per-path streams depend only on (seed, path index), so
// parallel runs reproduce bit-for-bit regardless of scheduling.
#pragma once

#include <cmath>
#include <cstdint>

namespace dliq {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    /// Substream for one path: the start counter is a scrambled function
    /// of (seed, index); increments use the Weyl constant, so distinct
    /// substreams cannot collide at reachable draw counts.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = scramble(seed ^ 0x2545F4914F6CDD1DULL);
        z = scramble(z + index * 0xB5AD4ECEDA1CE2A9ULL);
        return SplitMix64(z);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return scramble(state_);
    }

    /// Uniform on (0, 1].
    double next_uniform() {
        const std::uint64_t bits = next_u64() >> 11; // 53 bits
        return (static_cast<double>(bits) + 1.0) * 0x1p-53;
    }

    /// One Box-Muller pair of independent standard normals.
    void next_normal_pair(double& z1, double& z2) {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        z1 = r * std::cos(a);
        z2 = r * std::sin(a);
    }

    /// Exponential(1) draw.
    double next_exponential() { return -std::log(next_uniform()); }

private:
    static std::uint64_t scramble(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace dliq
