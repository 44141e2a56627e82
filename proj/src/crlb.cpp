#include "hdoa/crlb.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include <Eigen/Eigenvalues>

#include "hdoa/errors.hpp"

namespace hdoa {

namespace {

constexpr double kMaxCondition = 1e12;

double hermitian_condition(const CMatrix& m)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

}  // namespace

CVector steering_derivative(const ArrayGeometry& geometry, double theta)
{
    const CVector a = steering_vector(geometry, theta);
    const double k = 2.0 * kPi * geometry.spacing() / geometry.wavelength() * std::cos(theta);
    CVector d(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        d(i) = cd{0.0, k * geometry.indices()[static_cast<std::size_t>(i)]} * a(i);
    return d;
}

CrlbResult crlb_general(const ArrayGeometry& geometry, const SourceEnsemble& sources, int snapshots)
{
    require(snapshots >= 1, ErrorCode::InvalidArgument, "CRLB needs T >= 1");
    const int k = geometry.size();
    const int q = sources.count();
    require(q < k, ErrorCode::Identifiability,
            "Q=" + std::to_string(q) + " sources need more than Q antennas (K=" + std::to_string(k) + ")");

    const CMatrix a = steering_matrix(geometry, sources.angles);
    CMatrix ad(k, q);
    for (int i = 0; i < q; ++i) ad.col(i) = steering_derivative(geometry, sources.angles[static_cast<std::size_t>(i)]);
    Eigen::VectorXd p(q);
    for (int i = 0; i < q; ++i) p(i) = sources.powers[static_cast<std::size_t>(i)];

    const CMatrix aha = a.adjoint() * a;
    require(hermitian_condition(aha) <= kMaxCondition, ErrorCode::Conditioning, "A^H A is singular");
    CMatrix r = a * p.asDiagonal() * a.adjoint();
    r.diagonal().array() += sources.noise_power;
    require(hermitian_condition(r) <= kMaxCondition, ErrorCode::Conditioning, "covariance is singular");

    const CMatrix proj = CMatrix::Identity(k, k) - a * aha.ldlt().solve(a.adjoint());
    const CMatrix h = ad.adjoint() * proj * ad;
    const CMatrix s = p.asDiagonal() * a.adjoint() * r.ldlt().solve(a) * p.asDiagonal();
    const Eigen::MatrixXd fim = h.cwiseProduct(s.transpose()).real();

    Eigen::MatrixXd bound = fim.ldlt().solve(Eigen::MatrixXd::Identity(q, q));
    bound *= sources.noise_power / (2.0 * snapshots);
    bound = (bound + bound.transpose()) * 0.5;
    require(bound.allFinite() && bound.diagonal().minCoeff() > 0.0, ErrorCode::Conditioning,
            "Fisher information is singular");
    return {bound, bound.diagonal()};
}

double selection_objective(std::span<const int> positions)
{
    const auto k = static_cast<double>(positions.size());
    double s1 = 0.0;
    double s2 = 0.0;
    for (int p : positions) {
        s1 += p;
        s2 += static_cast<double>(p) * p;
    }
    return k * s2 - s1 * s1;
}

double selection_objective(const SelectionVector& selection)
{
    const auto idx = selection.indices();
    return selection_objective(std::span<const int>(idx));
}

double crlb_single_source(std::span<const int> positions, double theta, double snr, int snapshots)
{
    const auto k = static_cast<int>(positions.size());
    require(k >= 2, ErrorCode::InvalidArgument, "single-source CRLB needs K >= 2");
    require(std::abs(theta) < kPi / 2, ErrorCode::Domain, "angle outside (-90, 90) deg");
    require(snapshots >= 1, ErrorCode::InvalidArgument, "CRLB needs T >= 1");
    // d0 = lambda / 2, so (d0 / lambda)^2 = 1/4 and the wavelength cancels.
    const double c = std::cos(theta);
    const double beta = 8.0 * kPi * kPi * 0.25 * snr * snr * c * c / (1.0 + k * snr);
    return 1.0 / (snapshots * beta * selection_objective(positions));
}

double crlb_single_source(const SelectionVector& selection, double theta, double snr, int snapshots)
{
    const auto idx = selection.indices();
    return crlb_single_source(std::span<const int>(idx), theta, snr, snapshots);
}

}  // namespace hdoa
