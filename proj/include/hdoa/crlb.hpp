#pragma once

#include <Eigen/Dense>

#include "hdoa/array_core.hpp"

namespace hdoa {

struct CrlbResult {
    Eigen::MatrixXd matrix;    // Q x Q, rad^2
    Eigen::VectorXd per_source;
};

/// d a(theta) / d theta = j (2 pi d0 / lambda) cos(theta) D a(theta), D = diag(positions).
CVector steering_derivative(const ArrayGeometry& geometry, double theta);

/// Stochastic-model bound for the compressed K-element array:
///   sigma_v^2 / (2T) * { Re[ (Adot^H P_perp Adot) .* (R_s A^H R^-1 A R_s)^T ] }^-1
CrlbResult crlb_general(const ArrayGeometry& geometry, const SourceEnsemble& sources, int snapshots);

/// K * sum(p^2) - (sum p)^2 over the selected antenna indices.
double selection_objective(const SelectionVector& selection);
double selection_objective(std::span<const int> positions);

/// Single-source closed form 1 / (T * beta * objective) with
///   beta = 8 pi^2 (d0/lambda)^2 gamma^2 cos^2(theta) / (1 + K gamma).
double crlb_single_source(const SelectionVector& selection, double theta, double snr, int snapshots);
double crlb_single_source(std::span<const int> positions, double theta, double snr, int snapshots);

}  // namespace hdoa
