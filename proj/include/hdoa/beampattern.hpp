#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdoa/array_core.hpp"

namespace hdoa {

enum class SelectionStrategy { Exhaustive, GreedySwap };

SelectionStrategy parse_strategy(const std::string& name);
std::string to_string(SelectionStrategy s);

struct SelectionConfig {
    double delta = 1.0;  // ceiling on the peak sidelobe power ratio
    double grid_min_deg = -90.0;
    double grid_max_deg = 90.0;
    double grid_step_deg = 0.05;
    std::optional<double> mainlobe_halfwidth_deg;  // default: 102 deg / K
    SelectionStrategy strategy = SelectionStrategy::GreedySwap;
    int restarts = 4;
    std::uint64_t seed = 0;

    /// Scan grid including both endpoints.
    std::vector<double> grid_deg() const;
    double mainlobe_halfwidth(int chains) const;
};

/// B(theta) = |a^H(theta) W W^H a(theta_m)| on a grid of angles (radians).
std::vector<double> beampattern(const SelectionVector& selection, double theta_m, std::span<const double> grid_rad);

struct PslResult {
    double value = 0.0;       // (largest sidelobe / K)^2, in [0, 1]
    double sidelobe_deg = 0.0;
    bool degenerate = false;  // no sidelobe maximum outside the mainlobe
};

PslResult psl(const SelectionVector& selection, double theta_m, const SelectionConfig& cfg);

struct SelectionOutcome {
    SelectionVector selection;
    double objective = 0.0;
    double psl = 0.0;
};

/// Maximizes K*sum(p^2) - (sum p)^2 subject to psl <= delta. `geometry` must be
/// the full ULA {1..M}.
SelectionOutcome constrained_select_detail(double theta, const SelectionConfig& cfg, const ArrayGeometry& geometry,
                                           int chains);

SelectionVector constrained_select(double theta, const SelectionConfig& cfg, const ArrayGeometry& geometry,
                                   int chains);

/// {1..ceil(K/2)} U {M-floor(K/2)+1..M}.
SelectionVector boundary_template(int m, int chains);

}  // namespace hdoa
