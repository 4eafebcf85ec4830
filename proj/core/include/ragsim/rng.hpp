// SPDX-FileCopyrightText: Copyright (c) 2026 ragsim contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace ragsim {

// splitmix64 generator. Self-contained so that simulation runs are
// byte-reproducible independent of standard-library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]; never returns 0 so log() is safe.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Inverse-CDF exponential with the given rate (events per second).
    double next_exponential(double rate) {
        return -std::log(next_uniform()) / rate;
    }

    // Standard normal via Box-Muller.
    double next_normal() {
        double u1 = next_uniform();
        double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Lognormal multiplier with unit mean: exp(sigma*z - sigma^2/2).
    double next_jitter(double sigma) {
        if (sigma <= 0.0) return 1.0;
        return std::exp(sigma * next_normal() - 0.5 * sigma * sigma);
    }

private:
    std::uint64_t state_;
};

// Derives an independent sub-stream seed from a master seed. All randomness
// flows from one master seed; components get stable stream ids.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    Rng mix(master ^ (stream * 0xd1b54a32d192ed03ull));
    mix.next_u64();
    return mix.next_u64();
}

}  // namespace ragsim
