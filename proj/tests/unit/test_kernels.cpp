#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hdoa/kernels.hpp"

using namespace hdoa;
using namespace hdoa::kernels;

namespace {

class Threads : public ::testing::TestWithParam<int> {
protected:
    void SetUp() override { set_threads(GetParam()); }
    void TearDown() override { set_threads(configured_threads()); }
};

std::vector<double> grid(double step)
{
    std::vector<double> g;
    for (double d = -90.0; d <= 90.0 + 1e-9; d += step) g.push_back(d);
    return g;
}

}  // namespace

TEST(PeakSidelobe, Examples)
{
    const std::vector<std::uint8_t> none(5, 0);
    const double rising[] = {1, 2, 3, 4, 5};
    EXPECT_EQ(peak_sidelobe(rising, none), 5.0);  // endpoint above its neighbour
    const double bump[] = {1, 3, 2, 2.5, 1};
    EXPECT_EQ(peak_sidelobe(bump, none), 3.0);
    const std::vector<std::uint8_t> mask{0, 1, 1, 0, 0};
    EXPECT_EQ(peak_sidelobe(bump, mask), 2.5);
    const std::vector<std::uint8_t> all(5, 1);
    EXPECT_EQ(peak_sidelobe(bump, all), -1.0);
    const double flat[] = {2, 2, 2};
    EXPECT_EQ(peak_sidelobe(flat, std::vector<std::uint8_t>(3, 0)), -1.0);  // no strict maximum
}

TEST(ScanTable, PatternSumMatchesBeampattern)
{
    const ScanTable t(20, 30.0, grid(0.5), 10.0);
    const int pos[] = {1, 4, 5, 19};
    const auto sum = t.pattern_sum(pos);
    std::vector<double> gr;
    for (double d : t.grid_deg) gr.push_back(deg2rad(d));
    const auto b = serial::beampattern(pos, deg2rad(30.0), gr);
    for (std::size_t g = 0; g < b.size(); ++g) EXPECT_NEAR(std::abs(sum[g]), b[g], 1e-10);
    EXPECT_EQ(t.in_mainlobe[static_cast<std::size_t>((30.0 + 90.0) / 0.5)], 1);
    EXPECT_EQ(t.in_mainlobe[0], 0);
}

TEST_P(Threads, BeampatternBitIdentical)
{
    const int pos[] = {1, 2, 3, 4, 60, 77, 125, 126, 127, 128};
    std::vector<double> gr;
    for (double d : grid(0.05)) gr.push_back(deg2rad(d));
    EXPECT_EQ(serial::beampattern(pos, 0.4, gr), parallel::beampattern(pos, 0.4, gr));
}

TEST_P(Threads, SwapSidelobesBitIdentical)
{
    const ScanTable t(64, -20.0, grid(0.1), 12.0);
    const int pos[] = {1, 2, 3, 62, 63, 64};
    const auto base = t.pattern_sum(pos);
    std::vector<Swap> swaps;
    for (int out : pos)
        for (int in = 4; in <= 61; ++in) swaps.push_back({out, in});
    EXPECT_EQ(serial::swap_sidelobes(t, base, swaps), parallel::swap_sidelobes(t, base, swaps));
}

TEST_P(Threads, GramBitIdentical)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    CMatrix a(300, 90);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = cd(n(rng), n(rng));
    const CMatrix s = serial::gram(a);
    EXPECT_TRUE(s == parallel::gram(a));
    EXPECT_LE((s - a.adjoint() * a).norm(), 1e-10 * s.norm());
}

TEST_P(Threads, MapOrderAndErrors)
{
    auto sq = [](std::size_t i) { return static_cast<double>(i * i); };
    EXPECT_EQ(serial::map<double>(1000, sq), parallel::map<double>(1000, sq));
    try {
        parallel::map<int>(64, [](std::size_t i) -> int {
            if (i == 17 || i == 40) throw std::runtime_error("bad " + std::to_string(i));
            return 0;
        });
        FAIL() << "expected the worker exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "bad 17");
    }
}

INSTANTIATE_TEST_SUITE_P(Counts, Threads, ::testing::Values(1, 2, 4, 7));
