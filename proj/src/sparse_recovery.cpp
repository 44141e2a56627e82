#include "hdoa/sparse_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hdoa/errors.hpp"
#include "hdoa/kernels.hpp"

namespace hdoa {

double soft_threshold(double x, double kappa)
{
    if (x > kappa) return x - kappa;
    if (x < -kappa) return x + kappa;
    return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double kappa)
{
    return x.unaryExpr([kappa](double v) { return soft_threshold(v, kappa); });
}

AdmmLasso::AdmmLasso(const DictionaryMatrix& dictionary, AdmmConfig cfg) : dict_(dictionary), cfg_(cfg)
{
    require(cfg_.zeta > 0.0, ErrorCode::InvalidArgument, "ADMM penalty zeta must be positive");
    require(cfg_.max_iter >= 1, ErrorCode::InvalidArgument, "ADMM needs max_iter >= 1");
    require(cfg_.alpha >= 0.0, ErrorCode::InvalidArgument, "sparsity weight must be nonnegative");
    require(cfg_.tol > 0.0, ErrorCode::InvalidArgument, "ADMM tolerance must be positive");
    CMatrix g = kernels::parallel::gram(dictionary.columns);
    g.diagonal().array() += cfg_.zeta;
    factor_.compute(g);
    require(factor_.info() == Eigen::Success, ErrorCode::NumericalFailure, "cannot factor A^H A + zeta I");
}

Eigen::VectorXd AdmmLasso::solve_raw(const CVector& r, SparseSpectrum* info) const
{
    const CMatrix& a = dict_.columns;
    require(r.size() == a.rows(), ErrorCode::ShapeMismatch, "virtual signal length must match dictionary rows");
    const Eigen::Index n = a.cols();
    const CVector ahr = a.adjoint() * r;
    const double kappa = cfg_.alpha / cfg_.zeta;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    // Complex dual: its imaginary part drives Im(x) to zero, so the fixed point is
    // the real-constrained minimizer.
    CVector u = CVector::Zero(n);
    int it = 0;
    bool converged = false;
    for (it = 1; it <= cfg_.max_iter; ++it) {
        const CVector rhs = ahr + cfg_.zeta * (z.cast<cd>() - u);
        const CVector x = factor_.solve(rhs);
        // The spectrum models source powers, so the threshold acts on the real part.
        const Eigen::VectorXd z_next = soft_threshold((x + u).real(), kappa);
        u += x - z_next.cast<cd>();
        if (!x.allFinite() || !z_next.allFinite() || !u.allFinite())
            throw NumericalFailureError("ADMM produced a non-finite iterate", it);
        const double primal = (x - z_next.cast<cd>()).norm();
        const double dual = cfg_.zeta * (z_next - z).norm();
        z = z_next;
        if (info && cfg_.record_objective) {
            const double fit = (r - a * z.cast<cd>()).squaredNorm();
            info->objective.push_back(cfg_.alpha * z.lpNorm<1>() + 0.5 * fit);
        }
        if (primal <= cfg_.tol && dual <= cfg_.tol) {
            converged = true;
            break;
        }
    }
    if (info) {
        info->iterations = std::min(it, cfg_.max_iter);
        info->converged = converged;
    }
    return z;
}

SparseSpectrum AdmmLasso::solve(const CVector& r) const
{
    SparseSpectrum s;
    s.grid_deg = dict_.grid_deg;
    s.values = solve_raw(r, &s).cwiseMax(0.0);
    return s;
}

SparseSpectrum AdmmLasso::solve(const VirtualSignal& r) const { return solve(r.r); }

SparseSpectrum admm_lasso(const DictionaryMatrix& dictionary, const VirtualSignal& r, const AdmmConfig& cfg)
{
    return AdmmLasso(dictionary, cfg).solve(r);
}

std::vector<double> pick_peaks(const SparseSpectrum& spectrum, int q)
{
    const auto n = static_cast<int>(spectrum.values.size());
    require(q >= 1 && q <= n, ErrorCode::InvalidArgument, "peak count must lie in 1..grid size");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return spectrum.values(a) > spectrum.values(b); });
    require(spectrum.values(order.front()) > 0.0, ErrorCode::NoPeaks, "spectrum is identically zero");
    std::vector<double> out;
    for (int i = 0; i < q && spectrum.values(order[static_cast<std::size_t>(i)]) > 0.0; ++i)
        out.push_back(spectrum.grid_deg[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    std::sort(out.begin(), out.end());
    return out;
}

void write_spectrum_csv(std::ostream& out, const SparseSpectrum& spectrum)
{
    out << "angle_deg,magnitude\n";
    for (std::size_t i = 0; i < spectrum.grid_deg.size(); ++i)
        out << spectrum.grid_deg[i] << ',' << spectrum.values(static_cast<Eigen::Index>(i)) << '\n';
}

}  // namespace hdoa
