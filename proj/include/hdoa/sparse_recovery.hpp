#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hdoa/swsha.hpp"

namespace hdoa {

struct AdmmConfig {
    double alpha = 0.25;  // l1 weight
    double zeta = 1.0;    // augmented-Lagrangian penalty
    int max_iter = 500;
    double tol = 1e-6;    // bound on both the primal and the dual residual
    bool record_objective = false;
};

struct SparseSpectrum {
    std::vector<double> grid_deg;
    Eigen::VectorXd values;           // nonnegative, aligned with grid_deg
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective;    // alpha*|z|_1 + 0.5*|r - A z|_2^2 per iteration, when recorded
};

double soft_threshold(double x, double kappa);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double kappa);

/// Reusable solver: the Gram matrix A^H A + zeta I is built and factored once.
class AdmmLasso {
public:
    AdmmLasso(const DictionaryMatrix& dictionary, AdmmConfig cfg);

    SparseSpectrum solve(const VirtualSignal& r) const;
    SparseSpectrum solve(const CVector& r) const;

    /// Raw real iterate z (before clipping negatives).
    Eigen::VectorXd solve_raw(const CVector& r, SparseSpectrum* info = nullptr) const;

    const AdmmConfig& config() const noexcept { return cfg_; }
    const DictionaryMatrix& dictionary() const noexcept { return dict_; }

private:
    DictionaryMatrix dict_;
    AdmmConfig cfg_;
    Eigen::LLT<CMatrix> factor_;
};

SparseSpectrum admm_lasso(const DictionaryMatrix& dictionary, const VirtualSignal& r, const AdmmConfig& cfg);

/// Grid angles (deg, ascending) of the Q largest positive entries; ties go to the
/// smaller grid index. Fewer than Q angles come back when fewer entries are positive.
std::vector<double> pick_peaks(const SparseSpectrum& spectrum, int q);

/// CSV dump with header `angle_deg,magnitude`.
void write_spectrum_csv(std::ostream& out, const SparseSpectrum& spectrum);

}  // namespace hdoa
