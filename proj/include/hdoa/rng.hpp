#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace hdoa {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream id (splitmix64 finalizer). Used to give every
/// Monte Carlo trial and every loop iteration its own reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b)
{
    return derive_seed(derive_seed(base, a), b);
}

/// Circular complex Gaussian sample with E|x|^2 = variance.
std::complex<double> complex_gaussian(Rng& rng, double variance);

}  // namespace hdoa
