#pragma once

#include <stdexcept>
#include <string>

namespace hdoa {

enum class ErrorCode {
    Domain,              // argument outside its mathematical domain
    InvalidArgument,     // malformed input (shape, length, invariant)
    EmptySelection,
    InfeasibleAperture,  // requested slot count exceeds the physical aperture
    NumericalFailure,
    NoPeaks,
    Conditioning,
    Identifiability,
    Infeasible,          // no antenna selection satisfies the sidelobe ceiling
    TrainingFailure,
    ShapeMismatch,
    Usage,
    Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// ADMM or training produced a non-finite value.
class NumericalFailureError : public Error {
public:
    NumericalFailureError(const std::string& what, int iteration)
        : Error(ErrorCode::NumericalFailure, what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Carries the lowest sidelobe level the search reached.
class InfeasibleSelectionError : public Error {
public:
    InfeasibleSelectionError(const std::string& what, double min_psl)
        : Error(ErrorCode::Infeasible, what + " (minimum PSL found " + std::to_string(min_psl) + ")"),
          min_psl_(min_psl) {}

    double min_psl() const noexcept { return min_psl_; }

private:
    double min_psl_;
};

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) throw Error(code, what);
}

}  // namespace hdoa
