#include "hdoa/array_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "hdoa/errors.hpp"
#include "hdoa/rng.hpp"

namespace hdoa {

ArrayGeometry::ArrayGeometry(std::vector<int> indices, double wavelength)
    : indices_(std::move(indices)), wavelength_(wavelength)
{
    require(!indices_.empty(), ErrorCode::InvalidArgument, "geometry needs at least one antenna");
    require(wavelength_ > 0.0, ErrorCode::InvalidArgument, "wavelength must be positive");
    require(indices_.front() >= 1, ErrorCode::InvalidArgument, "antenna indices start at 1");
    for (std::size_t i = 1; i < indices_.size(); ++i)
        require(indices_[i] > indices_[i - 1], ErrorCode::InvalidArgument,
                "antenna indices must be strictly increasing");
}

ArrayGeometry ArrayGeometry::ula(int count, double wavelength)
{
    require(count >= 1, ErrorCode::InvalidArgument, "ULA needs at least one element");
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
    return ArrayGeometry(std::move(idx), wavelength);
}

bool ArrayGeometry::contiguous() const noexcept
{
    return indices_.back() - indices_.front() + 1 == size();
}

SelectionVector::SelectionVector(std::vector<std::uint8_t> rho) : rho_(std::move(rho))
{
    for (auto& v : rho_) {
        require(v == 0 || v == 1, ErrorCode::InvalidArgument, "selection entries must be 0 or 1");
        chains_ += v;
    }
}

SelectionVector SelectionVector::from_indices(int m, std::span<const int> one_based)
{
    std::vector<std::uint8_t> rho(static_cast<std::size_t>(m), 0);
    for (int idx : one_based) {
        require(idx >= 1 && idx <= m, ErrorCode::InvalidArgument,
                "selected index " + std::to_string(idx) + " outside 1.." + std::to_string(m));
        require(rho[static_cast<std::size_t>(idx - 1)] == 0, ErrorCode::InvalidArgument,
                "duplicate selected index " + std::to_string(idx));
        rho[static_cast<std::size_t>(idx - 1)] = 1;
    }
    return SelectionVector(std::move(rho));
}

SelectionVector SelectionVector::all(int m)
{
    return SelectionVector(std::vector<std::uint8_t>(static_cast<std::size_t>(m), 1));
}

std::vector<int> SelectionVector::indices() const
{
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(chains_));
    for (std::size_t i = 0; i < rho_.size(); ++i)
        if (rho_[i]) out.push_back(static_cast<int>(i) + 1);
    return out;
}

Eigen::MatrixXd SelectionVector::matrix() const
{
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size(), chains_);
    int k = 0;
    for (int m = 0; m < size(); ++m)
        if (rho_[static_cast<std::size_t>(m)]) w(m, k++) = 1.0;
    return w;
}

SourceEnsemble::SourceEnsemble(std::vector<double> angles_rad, std::vector<double> source_powers,
                               double noise)
    : angles(std::move(angles_rad)), powers(std::move(source_powers)), noise_power(noise)
{
    require(!angles.empty(), ErrorCode::InvalidArgument, "at least one source is required");
    require(angles.size() == powers.size(), ErrorCode::InvalidArgument,
            "one power per source angle");
    require(noise_power > 0.0, ErrorCode::InvalidArgument, "noise power must be positive");
    for (std::size_t q = 0; q < angles.size(); ++q) {
        require(std::abs(angles[q]) < kPi / 2, ErrorCode::Domain, "source angle outside (-90, 90) deg");
        require(powers[q] > 0.0, ErrorCode::InvalidArgument, "source powers must be positive");
        for (std::size_t r = 0; r < q; ++r)
            require(angles[r] != angles[q], ErrorCode::InvalidArgument, "source angles must be distinct");
    }
}

SourceEnsemble SourceEnsemble::equal_power(std::vector<double> angles_rad, double snr_db)
{
    const double p = std::pow(10.0, snr_db / 10.0);
    std::vector<double> powers(angles_rad.size(), p);
    return SourceEnsemble(std::move(angles_rad), std::move(powers), 1.0);
}

SnapshotMatrix::SnapshotMatrix(CMatrix d) : data(std::move(d))
{
    require(data.cols() >= 1, ErrorCode::InvalidArgument, "snapshot matrix needs T >= 1 columns");
}

CovarianceMatrix::CovarianceMatrix(CMatrix r) : r_(std::move(r))
{
    require(r_.rows() == r_.cols(), ErrorCode::ShapeMismatch, "covariance must be square");
    const double scale = std::max(1.0, r_.cwiseAbs().maxCoeff());
    const double asym = (r_ - r_.adjoint()).cwiseAbs().maxCoeff();
    require(asym <= 1e-10 * scale, ErrorCode::InvalidArgument, "covariance is not Hermitian");
    r_ = (r_ + r_.adjoint()) * 0.5;
    if (r_.rows() > 0) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(r_, Eigen::EigenvaluesOnly);
        require(es.eigenvalues().minCoeff() >= -1e-8 * scale, ErrorCode::InvalidArgument,
                "covariance is not positive semidefinite");
    }
}

CVector steering_vector(const ArrayGeometry& geometry, double theta)
{
    require(std::abs(theta) < kPi / 2, ErrorCode::Domain, "steering angle outside (-90, 90) deg");
    const double k = 2.0 * kPi / geometry.wavelength() * geometry.spacing() * std::sin(theta);
    CVector a(geometry.size());
    for (int i = 0; i < geometry.size(); ++i)
        a(i) = std::polar(1.0, k * geometry.indices()[static_cast<std::size_t>(i)]);
    return a;
}

CMatrix steering_matrix(const ArrayGeometry& geometry, std::span<const double> thetas)
{
    CMatrix a(geometry.size(), static_cast<Eigen::Index>(thetas.size()));
    for (std::size_t q = 0; q < thetas.size(); ++q)
        a.col(static_cast<Eigen::Index>(q)) = steering_vector(geometry, thetas[q]);
    return a;
}

ArrayGeometry compress_geometry(const ArrayGeometry& full, const SelectionVector& sel)
{
    require(sel.size() == full.size(), ErrorCode::ShapeMismatch,
            "selection length must equal the number of antennas");
    require(sel.chain_count() > 0, ErrorCode::EmptySelection, "no antenna selected");
    std::vector<int> kept;
    for (int m = 0; m < full.size(); ++m)
        if (sel.rho()[static_cast<std::size_t>(m)]) kept.push_back(full.indices()[static_cast<std::size_t>(m)]);
    return ArrayGeometry(std::move(kept), full.wavelength());
}

SnapshotMatrix synthesize_snapshots(const ArrayGeometry& geometry, const SourceEnsemble& sources,
                                    int snapshots, std::uint64_t seed)
{
    require(snapshots >= 1, ErrorCode::InvalidArgument, "need at least one snapshot");
    const CMatrix a = steering_matrix(geometry, sources.angles);
    Rng rng(seed);
    CMatrix y(geometry.size(), snapshots);
    CVector s(sources.count());
    for (int t = 0; t < snapshots; ++t) {
        for (int q = 0; q < sources.count(); ++q)
            s(q) = complex_gaussian(rng, sources.powers[static_cast<std::size_t>(q)]);
        y.col(t) = a * s;
        for (int k = 0; k < geometry.size(); ++k) y(k, t) += complex_gaussian(rng, sources.noise_power);
    }
    return SnapshotMatrix(std::move(y));
}

CovarianceMatrix sample_covariance(const SnapshotMatrix& y)
{
    CMatrix r = y.data * y.data.adjoint() / static_cast<double>(y.snapshots());
    r = (r + r.adjoint()) * 0.5;
    return CovarianceMatrix(std::move(r));
}

CovarianceMatrix true_covariance(const ArrayGeometry& geometry, const SourceEnsemble& sources)
{
    const CMatrix a = steering_matrix(geometry, sources.angles);
    Eigen::VectorXd p(sources.count());
    for (int q = 0; q < sources.count(); ++q) p(q) = sources.powers[static_cast<std::size_t>(q)];
    CMatrix r = a * p.asDiagonal() * a.adjoint();
    r.diagonal().array() += sources.noise_power;
    return CovarianceMatrix(std::move(r));
}

}  // namespace hdoa
