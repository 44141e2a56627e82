#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hdoa {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Antenna positions on a half-wavelength grid. Index m sits at m * d0 with
/// d0 = wavelength / 2, so the ULA {1..M} starts one spacing from the origin.
class ArrayGeometry {
public:
    explicit ArrayGeometry(std::vector<int> indices, double wavelength = 1.0);

    /// Contiguous ULA {1, ..., count}.
    static ArrayGeometry ula(int count, double wavelength = 1.0);

    const std::vector<int>& indices() const noexcept { return indices_; }
    int size() const noexcept { return static_cast<int>(indices_.size()); }
    double wavelength() const noexcept { return wavelength_; }
    double spacing() const noexcept { return wavelength_ / 2.0; }
    bool contiguous() const noexcept;

private:
    std::vector<int> indices_;
    double wavelength_;
};

/// Binary switch configuration: rho[m] = 1 when some RF chain is connected to
/// antenna m + 1. Interconvertible with the M x K selection matrix W.
class SelectionVector {
public:
    explicit SelectionVector(std::vector<std::uint8_t> rho);

    static SelectionVector from_indices(int m, std::span<const int> one_based);
    static SelectionVector all(int m);

    int size() const noexcept { return static_cast<int>(rho_.size()); }
    int chain_count() const noexcept { return chains_; }
    const std::vector<std::uint8_t>& rho() const noexcept { return rho_; }
    bool selected(int one_based) const { return rho_.at(one_based - 1) != 0; }

    /// Selected antenna indices (1-based, ascending).
    std::vector<int> indices() const;

    /// M x K selection matrix; column k has its single 1 at the k-th selected antenna.
    Eigen::MatrixXd matrix() const;

    friend bool operator==(const SelectionVector&, const SelectionVector&) = default;

private:
    std::vector<std::uint8_t> rho_;
    int chains_ = 0;
};

struct SourceEnsemble {
    std::vector<double> angles;  // radians, inside (-pi/2, pi/2)
    std::vector<double> powers;
    double noise_power = 1.0;

    SourceEnsemble(std::vector<double> angles_rad, std::vector<double> source_powers, double noise);

    /// Equal-power sources at the given SNR (dB), unit noise power.
    static SourceEnsemble equal_power(std::vector<double> angles_rad, double snr_db);

    int count() const noexcept { return static_cast<int>(angles.size()); }
};

struct SnapshotMatrix {
    CMatrix data;  // elements x snapshots

    explicit SnapshotMatrix(CMatrix d);
    int snapshots() const noexcept { return static_cast<int>(data.cols()); }
};

/// Hermitian PSD matrix. The constructor symmetrizes (R + R^H) / 2 after
/// checking the Hermitian and PSD tolerances.
class CovarianceMatrix {
public:
    explicit CovarianceMatrix(CMatrix r);

    const CMatrix& data() const noexcept { return r_; }
    int size() const noexcept { return static_cast<int>(r_.rows()); }
    double trace() const { return r_.trace().real(); }

private:
    CMatrix r_;
};

CVector steering_vector(const ArrayGeometry& geometry, double theta);

/// K x Q manifold [a(theta_1), ..., a(theta_Q)].
CMatrix steering_matrix(const ArrayGeometry& geometry, std::span<const double> thetas);

ArrayGeometry compress_geometry(const ArrayGeometry& full, const SelectionVector& sel);

SnapshotMatrix synthesize_snapshots(const ArrayGeometry& geometry, const SourceEnsemble& sources,
                                    int snapshots, std::uint64_t seed);

CovarianceMatrix sample_covariance(const SnapshotMatrix& y);

CovarianceMatrix true_covariance(const ArrayGeometry& geometry, const SourceEnsemble& sources);

}  // namespace hdoa
