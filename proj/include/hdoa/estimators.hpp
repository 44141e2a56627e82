#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hdoa/array_core.hpp"
#include "hdoa/neural.hpp"

namespace hdoa {

/// Angles min..max inclusive in radians.
std::vector<double> search_grid(double min_deg, double max_deg, double step_deg);

/// P(theta) = 1 / (a^H R^-1 a). R is diagonally loaded with 1e-6 tr(R)/K
/// when its condition number exceeds 1e10.
std::vector<double> mvdr_spectrum(const CovarianceMatrix& r, const ArrayGeometry& geometry,
                                  std::span<const double> grid_rad);

/// Grid angle of the spectrum maximum; values within 1e-12 (relative) of the
/// maximum tie, and ties go to the first grid point.
double mvdr_estimate(const CovarianceMatrix& r, const ArrayGeometry& geometry, std::span<const double> grid_rad);

/// Q angles (radians, ascending) from the noise-subspace polynomial of a
/// contiguous ULA.
std::vector<double> root_music(const CovarianceMatrix& r, const ArrayGeometry& geometry, int sources);

/// Roots of sum_k c[k] z^k via the companion matrix.
CVector polynomial_roots(const CVector& coefficients);

struct AsnDnnConfig {
    double epsilon_deg = 0.1;
    int max_iter = 10;
    std::optional<SelectionVector> rho0;  // asn_dnn_estimate defaults it to the boundary template
    double range_min_deg = -60.0;         // training range, used for clamping
    double range_max_deg = 60.0;
    double mvdr_step_deg = 0.5;
};

struct AsnDnnResult {
    double theta = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> trajectory;  // theta_0 .. theta_J
};

using SelectFn = std::function<SelectionVector(double theta)>;
using EstimateFn = std::function<double(const CovarianceMatrix& r)>;

/// Alternating select / re-measure / estimate loop. `geometry` is the full
/// M-antenna array; each iteration draws fresh snapshots with seed (seed, j).
AsnDnnResult asn_dnn_loop(const SelectFn& select, const EstimateFn& estimate, const ArrayGeometry& geometry,
                          const SourceEnsemble& sources, int snapshots, const AsnDnnConfig& cfg, std::uint64_t seed);

AsnDnnResult asn_dnn_estimate(const Mlp& asn, const Mlp& dnn, const ArrayGeometry& geometry,
                              const SourceEnsemble& sources, int snapshots, const AsnDnnConfig& cfg,
                              std::uint64_t seed);

}  // namespace hdoa
