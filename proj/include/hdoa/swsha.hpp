#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hdoa/array_core.hpp"

namespace hdoa {

/// Time plan of the switched sparse array: in slot l (1-based) the K chains
/// connect to the nested-form subarray
///   {(k1-1)L + l : k1 = 1..K1}  U  {(k2(K1+1)-1)L + l : k2 = 1..K2}.
struct NestedSchedule {
    int m = 0;
    int k1 = 0;
    int k2 = 0;
    int slots = 0;
    std::vector<std::vector<int>> slot_sets;
    double switch_delay = 0.0;  // seconds; bookkeeping only, its phase is compensated exactly

    int chains() const noexcept { return k1 + k2; }
    int max_index() const noexcept { return k2 * (k1 + 1) * slots; }
};

/// Largest slot count that fits the aperture: floor(M / (K2 (K1 + 1))).
int max_slots(int m, int k);

/// Splits K into (K1, K2) as K/2, K/2 for even K and (K-1)/2, (K+1)/2 for odd K.
std::pair<int, int> nested_split(int k);

NestedSchedule build_schedule(int m, int k, std::optional<int> slots = std::nullopt);

std::vector<int> subarray_indices(int slot, int k1, int k2, int slots);
std::vector<int> subarray_indices(int slot, const NestedSchedule& schedule);

/// Sorted union of all slot sets.
std::vector<int> augmented_array(const NestedSchedule& schedule);

struct DifferenceCoarray {
    std::vector<int> lags;         // all N^2 differences, entry i + j*N holds p_i - p_j
    std::vector<int> unique_lags;  // ascending
    int consecutive = 0;           // U such that {-U..U} are all present
};

DifferenceCoarray difference_coarray(std::span<const int> positions);

/// Degrees of freedom of the maximal consecutive symmetric segment.
int dof(const DifferenceCoarray& coarray);

/// Stacked slot covariance together with the antenna index of every row.
struct AugmentedCovariance {
    CovarianceMatrix covariance;
    std::vector<int> row_positions;
};

/// Finite-snapshot covariance of the phase-compensated stacked observation.
/// One source vector drives every slot block; slot noises are independent.
AugmentedCovariance synthesize_augmented_covariance(const NestedSchedule& schedule, const SourceEnsemble& sources,
                                                    int snapshots, std::uint64_t seed, double wavelength = 1.0);

/// Infinite-snapshot covariance A_P R_s A_P^H + sigma_v^2 I.
AugmentedCovariance analytic_augmented_covariance(const NestedSchedule& schedule, const SourceEnsemble& sources,
                                                  double wavelength = 1.0);

struct VirtualSignal {
    CVector r;              // vec(R_P), column-major
    std::vector<int> lags;  // lag of every entry
};

VirtualSignal vectorize_virtual(const CovarianceMatrix& r, std::span<const int> row_positions);
VirtualSignal vectorize_virtual(const AugmentedCovariance& r);

/// Half-open angular grid [min_deg, max_deg) with the given step.
struct AngleGrid {
    double min_deg = -90.0;
    double max_deg = 90.0;
    double step_deg = 1.0;

    int size() const;
    double angle_deg(int i) const { return min_deg + step_deg * i; }
    std::vector<double> degrees() const;
};

struct DictionaryMatrix {
    std::vector<double> grid_deg;
    CMatrix columns;  // rows aligned with VirtualSignal::lags
};

DictionaryMatrix build_dictionary(std::span<const int> lags, const AngleGrid& grid, double wavelength = 1.0);

/// Writes one slot per line as comma-separated indices.
void write_schedule(std::ostream& out, const NestedSchedule& schedule);

}  // namespace hdoa
