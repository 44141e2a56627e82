#include "hdoa/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hdoa/beampattern.hpp"
#include "hdoa/errors.hpp"
#include "hdoa/rng.hpp"

namespace hdoa {

namespace {

constexpr double kLoadingCondition = 1e10;
constexpr double kLoadingFactor = 1e-6;
constexpr double kTieTolerance = 1e-12;

}  // namespace

std::vector<double> search_grid(double min_deg, double max_deg, double step_deg)
{
    require(step_deg > 0.0 && max_deg >= min_deg, ErrorCode::InvalidArgument, "invalid search grid");
    const auto n = static_cast<int>(std::floor((max_deg - min_deg) / step_deg + 1e-9)) + 1;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = deg2rad(min_deg + step_deg * i);
    return out;
}

std::vector<double> mvdr_spectrum(const CovarianceMatrix& r, const ArrayGeometry& geometry,
                                  std::span<const double> grid_rad)
{
    require(r.size() == geometry.size(), ErrorCode::ShapeMismatch, "covariance and geometry sizes differ");
    require(!grid_rad.empty(), ErrorCode::InvalidArgument, "MVDR grid is empty");
    const int k = r.size();
    CMatrix rl = r.data();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rl, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kLoadingCondition) rl.diagonal().array() += kLoadingFactor * r.trace() / k;

    Eigen::LLT<CMatrix> llt(rl);
    require(llt.info() == Eigen::Success, ErrorCode::NumericalFailure, "covariance is singular after loading");
    const CMatrix rinv = llt.solve(CMatrix::Identity(k, k));

    std::vector<double> p(grid_rad.size());
    for (std::size_t g = 0; g < grid_rad.size(); ++g) {
        const CVector a = steering_vector(geometry, grid_rad[g]);
        const double q = (a.adjoint() * rinv * a)(0, 0).real();
        require(q > 0.0 && std::isfinite(q), ErrorCode::NumericalFailure, "MVDR denominator is not positive");
        p[g] = 1.0 / q;
    }
    return p;
}

double mvdr_estimate(const CovarianceMatrix& r, const ArrayGeometry& geometry, std::span<const double> grid_rad)
{
    const auto p = mvdr_spectrum(r, geometry, grid_rad);
    // Values within rounding of the maximum count as ties; the first one wins.
    const double top = *std::max_element(p.begin(), p.end());
    const auto first = std::find_if(p.begin(), p.end(), [&](double v) { return v >= top * (1.0 - kTieTolerance); });
    return grid_rad[static_cast<std::size_t>(first - p.begin())];
}

CVector polynomial_roots(const CVector& coefficients)
{
    // Drop leading zeros so the companion matrix is well defined.
    Eigen::Index deg = coefficients.size() - 1;
    const double scale = coefficients.cwiseAbs().maxCoeff();
    while (deg > 0 && std::abs(coefficients(deg)) <= 1e-14 * scale) --deg;
    require(deg >= 1, ErrorCode::NumericalFailure, "polynomial has no roots");
    CMatrix companion = CMatrix::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i) companion(i, deg - 1) = -coefficients(i) / coefficients(deg);
    Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
    require(es.info() == Eigen::Success, ErrorCode::NumericalFailure, "companion eigensolver failed");
    return es.eigenvalues();
}

std::vector<double> root_music(const CovarianceMatrix& r, const ArrayGeometry& geometry, int sources)
{
    const int k = r.size();
    require(k == geometry.size(), ErrorCode::ShapeMismatch, "covariance and geometry sizes differ");
    require(geometry.contiguous(), ErrorCode::InvalidArgument, "Root-MUSIC needs a contiguous ULA");
    require(sources >= 1 && sources < k, ErrorCode::Identifiability,
            "Root-MUSIC needs 1 <= Q < K (Q=" + std::to_string(sources) + ", K=" + std::to_string(k) + ")");

    Eigen::SelfAdjointEigenSolver<CMatrix> es(r.data());
    require(es.info() == Eigen::Success, ErrorCode::NumericalFailure, "eigendecomposition failed");
    // Eigenvalues ascend, so the first K - Q vectors span the noise subspace.
    const CMatrix en = es.eigenvectors().leftCols(k - sources);
    const CMatrix c = en * en.adjoint();

    // a^H C a = sum_l c_l z^l with z = exp(j pi sin theta) and c_l the sum of
    // the l-th superdiagonal; shifted by z^(K-1) to get an ordinary polynomial.
    CVector coeff = CVector::Zero(2 * k - 1);
    for (int l = -(k - 1); l <= k - 1; ++l) {
        cd s = 0.0;
        for (int i = std::max(0, -l); i < k && i + l < k; ++i) s += c(i, i + l);
        coeff(l + k - 1) = s;
    }
    const CVector roots = polynomial_roots(coeff);

    std::vector<cd> inside;
    for (Eigen::Index i = 0; i < roots.size(); ++i)
        if (std::abs(roots(i)) <= 1.0) inside.push_back(roots(i));
    std::stable_sort(inside.begin(), inside.end(),
                     [](cd a, cd b) { return 1.0 - std::abs(a) < 1.0 - std::abs(b); });

    // Double roots on the circle split numerically; skip near-duplicates.
    std::vector<cd> chosen;
    for (cd z : inside) {
        if (static_cast<int>(chosen.size()) == sources) break;
        const bool dup = std::any_of(chosen.begin(), chosen.end(), [&](cd w) { return std::abs(w - z) < 1e-5; });
        if (!dup) chosen.push_back(z);
    }
    require(static_cast<int>(chosen.size()) == sources, ErrorCode::NumericalFailure,
            "not enough roots inside the unit circle");

    const double scale = 2.0 * geometry.spacing() / geometry.wavelength();  // 1 for half-wavelength spacing
    std::vector<double> angles;
    for (cd z : chosen) angles.push_back(std::asin(std::clamp(std::arg(z) / (kPi * scale), -1.0, 1.0)));
    std::sort(angles.begin(), angles.end());
    return angles;
}

AsnDnnResult asn_dnn_loop(const SelectFn& select, const EstimateFn& estimate, const ArrayGeometry& geometry,
                          const SourceEnsemble& sources, int snapshots, const AsnDnnConfig& cfg, std::uint64_t seed)
{
    require(cfg.epsilon_deg > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
    require(cfg.max_iter >= 1, ErrorCode::InvalidArgument, "max_iter must be at least 1");
    require(cfg.range_max_deg > cfg.range_min_deg, ErrorCode::InvalidArgument, "empty training range");
    const double lo = deg2rad(cfg.range_min_deg);
    const double hi = deg2rad(cfg.range_max_deg);
    auto clamp = [&](double th) { return std::clamp(th, lo, hi); };

    require(cfg.rho0.has_value(), ErrorCode::InvalidArgument, "initial configuration rho0 is required");
    const ArrayGeometry g0 = compress_geometry(geometry, *cfg.rho0);
    const auto y0 = synthesize_snapshots(g0, sources, snapshots, derive_seed(seed, 0));
    const auto grid = search_grid(cfg.range_min_deg, cfg.range_max_deg, cfg.mvdr_step_deg);

    AsnDnnResult res;
    res.trajectory.push_back(clamp(mvdr_estimate(sample_covariance(y0), g0, grid)));
    const double eps = deg2rad(cfg.epsilon_deg);
    for (int j = 1; j <= cfg.max_iter; ++j) {
        const double prev = res.trajectory.back();
        const ArrayGeometry gj = compress_geometry(geometry, select(prev));
        const auto yj = synthesize_snapshots(gj, sources, snapshots, derive_seed(seed, static_cast<std::uint64_t>(j)));
        const double th = clamp(estimate(sample_covariance(yj)));
        res.trajectory.push_back(th);
        res.iterations = j;
        if (std::abs(th - prev) <= eps) {
            res.converged = true;
            break;
        }
    }
    const std::size_t n = res.trajectory.size();
    res.theta = clamp(0.5 * (res.trajectory[n - 1] + res.trajectory[n - 2]));
    return res;
}

AsnDnnResult asn_dnn_estimate(const Mlp& asn, const Mlp& dnn, const ArrayGeometry& geometry,
                              const SourceEnsemble& sources, int snapshots, const AsnDnnConfig& cfg,
                              std::uint64_t seed)
{
    require(asn.outputs() == geometry.size(), ErrorCode::ShapeMismatch, "ASN output size must equal M");
    // K follows from the estimator input length K(K+1).
    const auto k = static_cast<int>(std::lround((std::sqrt(1.0 + 4.0 * dnn.inputs()) - 1.0) / 2.0));
    require(k * (k + 1) == dnn.inputs(), ErrorCode::ShapeMismatch, "estimator input length is not K(K+1)");
    AsnDnnConfig c = cfg;
    if (!c.rho0) c.rho0 = boundary_template(geometry.size(), k);
    return asn_dnn_loop([&](double th) { return asn_infer(asn, std::cos(th), k); },
                        [&](const CovarianceMatrix& r) { return dnn_infer(dnn, dnn_input(r)); }, geometry, sources,
                        snapshots, c, seed);
}

}  // namespace hdoa
