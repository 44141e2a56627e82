#include "hdoa/rng.hpp"
#include "hdoa/errors.hpp"

#include <cmath>

namespace hdoa {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::EmptySelection: return "empty selection";
    case ErrorCode::InfeasibleAperture: return "infeasible aperture";
    case ErrorCode::NumericalFailure: return "numerical failure";
    case ErrorCode::NoPeaks: return "no peaks";
    case ErrorCode::Conditioning: return "ill-conditioned";
    case ErrorCode::Identifiability: return "not identifiable";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::TrainingFailure: return "training failure";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::Usage: return "usage";
    case ErrorCode::Io: return "io";
    }
    return "error";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::complex<double> complex_gaussian(Rng& rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

}  // namespace hdoa
