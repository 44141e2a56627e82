#include "hdoa/swsha.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "hdoa/errors.hpp"
#include "hdoa/rng.hpp"

namespace hdoa {

std::pair<int, int> nested_split(int k)
{
    require(k >= 2, ErrorCode::InvalidArgument, "nested split needs K >= 2");
    if (k % 2 == 0) return {k / 2, k / 2};
    return {(k - 1) / 2, (k + 1) / 2};
}

int max_slots(int m, int k)
{
    const auto [k1, k2] = nested_split(k);
    return m / (k2 * (k1 + 1));
}

NestedSchedule build_schedule(int m, int k, std::optional<int> slots)
{
    require(k >= 2, ErrorCode::InvalidArgument, "schedule needs K >= 2");
    require(m >= k, ErrorCode::InvalidArgument, "schedule needs M >= K");
    const int l_max = max_slots(m, k);
    require(l_max >= 1, ErrorCode::InfeasibleAperture,
            "aperture M=" + std::to_string(m) + " cannot hold one nested subarray of K=" + std::to_string(k));
    const int l = slots.value_or(l_max);
    require(l >= 1, ErrorCode::InvalidArgument, "slot count must be >= 1");
    require(l <= l_max, ErrorCode::InfeasibleAperture,
            "L=" + std::to_string(l) + " exceeds L_max=" + std::to_string(l_max));

    NestedSchedule s;
    s.m = m;
    std::tie(s.k1, s.k2) = nested_split(k);
    s.slots = l;
    for (int slot = 1; slot <= l; ++slot) s.slot_sets.push_back(subarray_indices(slot, s.k1, s.k2, l));
    return s;
}

std::vector<int> subarray_indices(int slot, int k1, int k2, int slots)
{
    require(slot >= 1 && slot <= slots, ErrorCode::InvalidArgument,
            "slot " + std::to_string(slot) + " outside 1.." + std::to_string(slots));
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k1 + k2));
    for (int a = 1; a <= k1; ++a) out.push_back((a - 1) * slots + slot);
    for (int b = 1; b <= k2; ++b) out.push_back((b * (k1 + 1) - 1) * slots + slot);
    return out;
}

std::vector<int> subarray_indices(int slot, const NestedSchedule& schedule)
{
    return subarray_indices(slot, schedule.k1, schedule.k2, schedule.slots);
}

std::vector<int> augmented_array(const NestedSchedule& schedule)
{
    std::vector<int> all;
    for (const auto& set : schedule.slot_sets) all.insert(all.end(), set.begin(), set.end());
    std::sort(all.begin(), all.end());
    return all;
}

DifferenceCoarray difference_coarray(std::span<const int> positions)
{
    DifferenceCoarray d;
    const std::size_t n = positions.size();
    d.lags.resize(n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) d.lags[i + j * n] = positions[i] - positions[j];
    d.unique_lags = d.lags;
    std::sort(d.unique_lags.begin(), d.unique_lags.end());
    d.unique_lags.erase(std::unique(d.unique_lags.begin(), d.unique_lags.end()), d.unique_lags.end());

    auto has = [&](int lag) { return std::binary_search(d.unique_lags.begin(), d.unique_lags.end(), lag); };
    if (!has(0)) return d;
    int u = 0;
    while (has(u + 1) && has(-(u + 1))) ++u;
    d.consecutive = u;
    return d;
}

int dof(const DifferenceCoarray& coarray) { return coarray.consecutive; }

namespace {

std::vector<int> stacked_rows(const NestedSchedule& schedule)
{
    std::vector<int> rows;
    for (const auto& set : schedule.slot_sets) rows.insert(rows.end(), set.begin(), set.end());
    return rows;
}

}  // namespace

AugmentedCovariance synthesize_augmented_covariance(const NestedSchedule& schedule, const SourceEnsemble& sources,
                                                    int snapshots, std::uint64_t seed, double wavelength)
{
    require(snapshots >= 1, ErrorCode::InvalidArgument, "need at least one snapshot per slot");
    std::vector<int> rows = stacked_rows(schedule);
    // Row order follows the slot stacking, not the sorted augmented array.
    const ArrayGeometry stacked_geometry = [&] {
        std::vector<int> sorted = rows;
        std::sort(sorted.begin(), sorted.end());
        return ArrayGeometry(sorted, wavelength);
    }();
    const CMatrix a_sorted = steering_matrix(stacked_geometry, sources.angles);
    const int n = static_cast<int>(rows.size());
    CMatrix a(n, sources.count());
    for (int i = 0; i < n; ++i) {
        const auto it = std::lower_bound(stacked_geometry.indices().begin(), stacked_geometry.indices().end(),
                                         rows[static_cast<std::size_t>(i)]);
        a.row(i) = a_sorted.row(it - stacked_geometry.indices().begin());
    }

    Rng rng(seed);
    CMatrix y(n, snapshots);
    CVector s(sources.count());
    for (int t = 0; t < snapshots; ++t) {
        for (int q = 0; q < sources.count(); ++q)
            s(q) = complex_gaussian(rng, sources.powers[static_cast<std::size_t>(q)]);
        y.col(t) = a * s;
        for (int i = 0; i < n; ++i) y(i, t) += complex_gaussian(rng, sources.noise_power);
    }
    return {sample_covariance(SnapshotMatrix(std::move(y))), std::move(rows)};
}

AugmentedCovariance analytic_augmented_covariance(const NestedSchedule& schedule, const SourceEnsemble& sources,
                                                  double wavelength)
{
    std::vector<int> rows = stacked_rows(schedule);
    const int n = static_cast<int>(rows.size());
    CMatrix a(n, sources.count());
    const double k = 2.0 * kPi / wavelength * (wavelength / 2.0);
    for (int i = 0; i < n; ++i)
        for (int q = 0; q < sources.count(); ++q)
            a(i, q) = std::polar(1.0, k * rows[static_cast<std::size_t>(i)] *
                                          std::sin(sources.angles[static_cast<std::size_t>(q)]));
    Eigen::VectorXd p(sources.count());
    for (int q = 0; q < sources.count(); ++q) p(q) = sources.powers[static_cast<std::size_t>(q)];
    CMatrix r = a * p.asDiagonal() * a.adjoint();
    r.diagonal().array() += sources.noise_power;
    return {CovarianceMatrix(std::move(r)), std::move(rows)};
}

VirtualSignal vectorize_virtual(const CovarianceMatrix& r, std::span<const int> row_positions)
{
    const int n = r.size();
    require(static_cast<int>(row_positions.size()) == n, ErrorCode::ShapeMismatch,
            "one position per covariance row");
    VirtualSignal v;
    v.r.resize(static_cast<Eigen::Index>(n) * n);
    v.lags.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const auto e = static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * static_cast<std::size_t>(n);
            v.r(static_cast<Eigen::Index>(e)) = r.data()(i, j);
            v.lags[e] = row_positions[static_cast<std::size_t>(i)] - row_positions[static_cast<std::size_t>(j)];
        }
    return v;
}

VirtualSignal vectorize_virtual(const AugmentedCovariance& r)
{
    return vectorize_virtual(r.covariance, r.row_positions);
}

int AngleGrid::size() const
{
    require(step_deg > 0.0, ErrorCode::InvalidArgument, "grid step must be positive");
    const double span = (max_deg - min_deg) / step_deg;
    return static_cast<int>(std::ceil(span - 1e-9));
}

std::vector<double> AngleGrid::degrees() const
{
    std::vector<double> out(static_cast<std::size_t>(std::max(0, size())));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = angle_deg(static_cast<int>(i));
    return out;
}

DictionaryMatrix build_dictionary(std::span<const int> lags, const AngleGrid& grid, double wavelength)
{
    const int q = grid.size();
    require(q >= 1, ErrorCode::InvalidArgument, "dictionary grid is empty");
    DictionaryMatrix d;
    d.grid_deg = grid.degrees();
    d.columns.resize(static_cast<Eigen::Index>(lags.size()), q);
    const double k = 2.0 * kPi / wavelength * (wavelength / 2.0);
    for (int c = 0; c < q; ++c) {
        const double s = std::sin(deg2rad(d.grid_deg[static_cast<std::size_t>(c)]));
        for (std::size_t r = 0; r < lags.size(); ++r)
            d.columns(static_cast<Eigen::Index>(r), c) = std::polar(1.0, k * lags[r] * s);
    }
    return d;
}

void write_schedule(std::ostream& out, const NestedSchedule& schedule)
{
    for (const auto& set : schedule.slot_sets) {
        for (std::size_t i = 0; i < set.size(); ++i) out << (i ? "," : "") << set[i];
        out << '\n';
    }
}

}  // namespace hdoa
