#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel` that must
// produce bit-identical results; the library calls the parallel versions.

#include <cstddef>
#include <exception>
#include <span>
#include <utility>
#include <vector>

#include <omp.h>

#include "hdoa/array_core.hpp"

namespace hdoa::kernels {

/// Precomputed phase rows exp(-j*pi*m*(sin(theta_g) - sin(theta_m))) for
/// antennas m = 1..M over a scan grid, plus the mainlobe mask.
struct ScanTable {
    int antennas = 0;
    std::vector<double> grid_deg;
    std::vector<std::uint8_t> in_mainlobe;
    std::vector<cd> phase;  // antennas x grid, row-major

    ScanTable(int m, double theta_m_deg, std::vector<double> grid, double mainlobe_halfwidth_deg);

    std::size_t points() const noexcept { return grid_deg.size(); }
    const cd* row(int one_based) const { return phase.data() + static_cast<std::size_t>(one_based - 1) * points(); }

    /// Complex pattern sum over the selected antennas.
    std::vector<cd> pattern_sum(std::span<const int> one_based) const;
};

/// Largest sidelobe local maximum of a magnitude pattern. Grid endpoints count
/// as maxima when they exceed their single neighbour; points inside the
/// mainlobe are skipped. Returns -1 when no sidelobe maximum exists.
double peak_sidelobe(std::span<const double> magnitude, std::span<const std::uint8_t> in_mainlobe);

struct Swap {
    int out;  // 1-based antenna leaving the selection
    int in;   // 1-based antenna joining it
};

namespace serial {

std::vector<double> beampattern(std::span<const int> positions, double theta_m, std::span<const double> grid_rad);

/// Peak sidelobe magnitude (unnormalized) for every swap applied to `base`.
std::vector<double> swap_sidelobes(const ScanTable& table, std::span<const cd> base, std::span<const Swap> swaps);

/// A^H A.
CMatrix gram(const CMatrix& a);

template <class T, class F>
std::vector<T> map(std::size_t n, F&& fn)
{
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> beampattern(std::span<const int> positions, double theta_m, std::span<const double> grid_rad);

std::vector<double> swap_sidelobes(const ScanTable& table, std::span<const cd> base, std::span<const Swap> swaps);

CMatrix gram(const CMatrix& a);

/// Order-preserving parallel map: element i is always fn(i), so any reduction
/// done afterwards in index order is independent of the thread count. If any
/// call throws, the exception from the lowest failing index is rethrown.
template <class T, class F>
std::vector<T> map(std::size_t n, F&& fn)
{
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            out[k] = fn(k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace parallel

/// Thread count from HDOA_THREADS (falls back to the OpenMP default).
int configured_threads();
void set_threads(int n);

}  // namespace hdoa::kernels
