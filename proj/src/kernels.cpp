#include "hdoa/kernels.hpp"

#include <cmath>
#include <cstdlib>

#include "hdoa/errors.hpp"

namespace hdoa::kernels {

namespace {

double pattern_at(std::span<const int> positions, double du)
{
    cd acc{0.0, 0.0};
    for (int p : positions) acc += std::polar(1.0, -kPi * p * du);
    return std::abs(acc);
}

double swapped_sidelobe(const ScanTable& table, std::span<const cd> base, Swap s, std::vector<double>& work)
{
    const cd* out = table.row(s.out);
    const cd* in = table.row(s.in);
    const std::size_t n = table.points();
    for (std::size_t g = 0; g < n; ++g) work[g] = std::abs(base[g] - out[g] + in[g]);
    return peak_sidelobe(work, table.in_mainlobe);
}

}  // namespace

ScanTable::ScanTable(int m, double theta_m_deg, std::vector<double> grid, double mainlobe_halfwidth_deg)
    : antennas(m), grid_deg(std::move(grid))
{
    require(m >= 1, ErrorCode::InvalidArgument, "scan table needs antennas");
    require(!grid_deg.empty(), ErrorCode::InvalidArgument, "scan grid is empty");
    const double sm = std::sin(deg2rad(theta_m_deg));
    const std::size_t n = grid_deg.size();
    in_mainlobe.resize(n);
    std::vector<double> du(n);
    for (std::size_t g = 0; g < n; ++g) {
        du[g] = std::sin(deg2rad(grid_deg[g])) - sm;
        in_mainlobe[g] = std::abs(grid_deg[g] - theta_m_deg) < mainlobe_halfwidth_deg ? 1 : 0;
    }
    phase.resize(static_cast<std::size_t>(m) * n);
    for (int a = 1; a <= m; ++a)
        for (std::size_t g = 0; g < n; ++g)
            phase[static_cast<std::size_t>(a - 1) * n + g] = std::polar(1.0, -kPi * a * du[g]);
}

std::vector<cd> ScanTable::pattern_sum(std::span<const int> one_based) const
{
    std::vector<cd> sum(points(), cd{0.0, 0.0});
    for (int a : one_based) {
        const cd* r = row(a);
        for (std::size_t g = 0; g < points(); ++g) sum[g] += r[g];
    }
    return sum;
}

double peak_sidelobe(std::span<const double> b, std::span<const std::uint8_t> in_mainlobe)
{
    const std::size_t n = b.size();
    double best = -1.0;
    if (n == 1) return in_mainlobe[0] ? -1.0 : b[0];
    for (std::size_t g = 0; g < n; ++g) {
        if (in_mainlobe[g]) continue;
        const bool left_ok = g == 0 || b[g] > b[g - 1];
        // Plateaus count once, at their left edge; the first point has no left edge.
        const bool right_ok = g + 1 == n || (g == 0 ? b[g] > b[g + 1] : b[g] >= b[g + 1]);
        if (left_ok && right_ok && b[g] > best) best = b[g];
    }
    return best;
}

namespace serial {

std::vector<double> beampattern(std::span<const int> positions, double theta_m, std::span<const double> grid_rad)
{
    const double sm = std::sin(theta_m);
    std::vector<double> out(grid_rad.size());
    for (std::size_t g = 0; g < grid_rad.size(); ++g) out[g] = pattern_at(positions, std::sin(grid_rad[g]) - sm);
    return out;
}

std::vector<double> swap_sidelobes(const ScanTable& table, std::span<const cd> base, std::span<const Swap> swaps)
{
    std::vector<double> out(swaps.size());
    std::vector<double> work(table.points());
    for (std::size_t i = 0; i < swaps.size(); ++i) out[i] = swapped_sidelobe(table, base, swaps[i], work);
    return out;
}

CMatrix gram(const CMatrix& a)
{
    const Eigen::Index n = a.cols();
    CMatrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            const cd v = a.col(i).dot(a.col(j));
            g(i, j) = v;
            g(j, i) = std::conj(v);
        }
    return g;
}

}  // namespace serial

namespace parallel {

std::vector<double> beampattern(std::span<const int> positions, double theta_m, std::span<const double> grid_rad)
{
    const double sm = std::sin(theta_m);
    std::vector<double> out(grid_rad.size());
    const auto n = static_cast<long long>(grid_rad.size());
#pragma omp parallel for schedule(static)
    for (long long g = 0; g < n; ++g) {
        const auto i = static_cast<std::size_t>(g);
        out[i] = pattern_at(positions, std::sin(grid_rad[i]) - sm);
    }
    return out;
}

std::vector<double> swap_sidelobes(const ScanTable& table, std::span<const cd> base, std::span<const Swap> swaps)
{
    std::vector<double> out(swaps.size());
    const auto n = static_cast<long long>(swaps.size());
#pragma omp parallel
    {
        std::vector<double> work(table.points());
#pragma omp for schedule(static)
        for (long long i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            out[k] = swapped_sidelobe(table, base, swaps[k], work);
        }
    }
    return out;
}

CMatrix gram(const CMatrix& a)
{
    const Eigen::Index n = a.cols();
    CMatrix g(n, n);
#pragma omp parallel for schedule(dynamic, 4)
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            const cd v = a.col(i).dot(a.col(j));
            g(i, j) = v;
            g(j, i) = std::conj(v);
        }
    return g;
}

}  // namespace parallel

int configured_threads()
{
    if (const char* env = std::getenv("HDOA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
}

void set_threads(int n)
{
    if (n > 0) omp_set_num_threads(n);
}

}  // namespace hdoa::kernels
