// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Seeded random sampling shared by every stochastic operation.

#ifndef RIS_RNG_HPP
#define RIS_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ris {

/// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic child seed for stream `stream` of `seed`. Distinct streams
/// of the same parent give statistically independent generators.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Generator for circularly-symmetric complex Gaussian samples.
/// CN(0,1) is drawn as independent real and imaginary parts, each N(0, 1/2).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::complex<double> complex_normal()
    {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re, im};
    }

    Rng split(std::uint64_t stream) { return Rng(derive_seed(engine_(), stream)); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, std::sqrt(0.5)};
};

} // namespace ris

#endif // RIS_RNG_HPP
