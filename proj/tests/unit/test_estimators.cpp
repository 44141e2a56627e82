#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hdoa/errors.hpp"
#include "hdoa/estimators.hpp"
#include "hdoa/rng.hpp"

using namespace hdoa;

namespace {

SelectionVector first_k(int m, int k)
{
    std::vector<int> idx;
    for (int i = 1; i <= k; ++i) idx.push_back(i);
    return SelectionVector::from_indices(m, idx);
}

}  // namespace

TEST(SearchGrid, InclusiveEndpoints)
{
    const auto g = search_grid(-60.0, 60.0, 0.5);
    ASSERT_EQ(g.size(), 241u);
    EXPECT_NEAR(rad2deg(g.back()), 60.0, 1e-12);
    EXPECT_THROW(search_grid(0.0, 1.0, 0.0), Error);
}

TEST(Mvdr, NoiselessSinglePeakOnGrid)
{
    const auto g = ArrayGeometry::ula(8);
    const auto grid = search_grid(-60.0, 60.0, 1.0);
    for (double deg : {-43.0, 0.0, 30.0}) {
        const auto r = true_covariance(g, SourceEnsemble({deg2rad(deg)}, {1.0}, 1e-300));
        EXPECT_NEAR(rad2deg(mvdr_estimate(r, g, grid)), deg, 1e-9);
    }
}

TEST(Mvdr, WhiteNoiseIsFlatAndPicksFirstPoint)
{
    const auto g = ArrayGeometry({1, 2, 5, 7});
    const auto grid = search_grid(-50.0, 50.0, 2.0);
    const CovarianceMatrix r(CMatrix::Identity(4, 4) * 3.0);
    const auto p = mvdr_spectrum(r, g, grid);
    for (double v : p) EXPECT_NEAR(v, 3.0 / 4.0, 1e-12);
    EXPECT_EQ(mvdr_estimate(r, g, grid), grid.front());
}

TEST(Mvdr, PositiveAndScaleInvariant)
{
    const auto g = ArrayGeometry::ula(6);
    const auto grid = search_grid(-80.0, 80.0, 0.5);
    const auto r = sample_covariance(synthesize_snapshots(g, SourceEnsemble::equal_power({0.3, -0.6}, 5.0), 60, 3));
    const auto p = mvdr_spectrum(r, g, grid);
    const auto q = mvdr_spectrum(CovarianceMatrix(CMatrix(r.data() * 7.5)), g, grid);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_GT(p[i], 0.0);
        EXPECT_NEAR(q[i], 7.5 * p[i], 1e-9 * q[i]);
    }
    EXPECT_EQ(mvdr_estimate(r, g, grid), mvdr_estimate(CovarianceMatrix(CMatrix(r.data() * 7.5)), g, grid));
    EXPECT_THROW(mvdr_spectrum(r, ArrayGeometry::ula(5), grid), Error);
}

TEST(Mvdr, MonteCarloWithinOneCell)
{
    const auto g = ArrayGeometry::ula(8);
    const auto grid = search_grid(-60.0, 60.0, 1.0);
    const auto src = SourceEnsemble::equal_power({deg2rad(30.0)}, 0.0);
    int hits = 0;
    for (int t = 0; t < 200; ++t) {
        const auto r = sample_covariance(synthesize_snapshots(g, src, 100, derive_seed(31, static_cast<std::uint64_t>(t))));
        hits += std::abs(rad2deg(mvdr_estimate(r, g, grid)) - 30.0) <= 1.0 + 1e-9;
    }
    EXPECT_GE(hits, 190);
}

TEST(Roots, KnownPolynomial)
{
    // (z - 1)(z - 2)(z + 3j) = z^3 + (-3 + 3j) z^2 + (2 - 9j) z + 6j
    CVector c(4);
    c << cd(0, 6), cd(2, -9), cd(-3, 3), cd(1, 0);
    const CVector r = polynomial_roots(c);
    ASSERT_EQ(r.size(), 3);
    for (cd want : {cd(1, 0), cd(2, 0), cd(0, -3)}) {
        double best = 1e9;
        for (Eigen::Index i = 0; i < 3; ++i) best = std::min(best, std::abs(r(i) - want));
        EXPECT_LT(best, 1e-10);
    }
}

TEST(Roots, ConjugateReciprocalPairing)
{
    // Root-MUSIC style polynomial from a random Hermitian C: c_{-l} = conj(c_l),
    // so roots pair up as z and 1 / conj(z).
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    const int k = 6;
    CMatrix e(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) e(i, j) = cd(n(rng), n(rng));
    const CMatrix c = e * e.adjoint();
    CVector coef(2 * k - 1);
    for (int l = -(k - 1); l <= k - 1; ++l) {
        cd s = 0.0;
        for (int i = 0; i < k; ++i)
            if (i + l >= 0 && i + l < k) s += c(i, i + l);
        coef(l + k - 1) = s;
    }
    const CVector r = polynomial_roots(coef);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const cd mate = 1.0 / std::conj(r(i));
        double best = 1e9;
        for (Eigen::Index j = 0; j < r.size(); ++j) best = std::min(best, std::abs(r(j) - mate));
        EXPECT_LT(best, 1e-8 * std::max(1.0, std::abs(mate)));
    }
}

TEST(RootMusic, SingleSourceNoiseless)
{
    const auto g = ArrayGeometry::ula(8);
    const auto r = true_covariance(g, SourceEnsemble({deg2rad(20.0)}, {1.0}, 1e-300));
    const auto th = root_music(r, g, 1);
    ASSERT_EQ(th.size(), 1u);
    EXPECT_NEAR(rad2deg(th[0]), 20.0, 1e-6);
}

TEST(RootMusic, TwoSourcesAnalytic)
{
    const auto g = ArrayGeometry::ula(8);
    const auto r = true_covariance(g, SourceEnsemble({deg2rad(15.0), deg2rad(-10.0)}, {1.0, 2.0}, 0.5));
    const auto th = root_music(r, g, 2);
    ASSERT_EQ(th.size(), 2u);
    EXPECT_NEAR(rad2deg(th[0]), -10.0, 1e-4);
    EXPECT_NEAR(rad2deg(th[1]), 15.0, 1e-4);
}

TEST(RootMusic, ShiftedUlaAndErrors)
{
    // A contiguous run not starting at 1 only adds a common phase.
    const auto g = ArrayGeometry({5, 6, 7, 8, 9});
    const auto r = true_covariance(g, SourceEnsemble({deg2rad(-33.0)}, {1.0}, 0.1));
    EXPECT_NEAR(rad2deg(root_music(r, g, 1)[0]), -33.0, 1e-6);
    EXPECT_THROW(root_music(r, g, 5), Error);
    EXPECT_THROW(root_music(r, g, 0), Error);
    const auto sparse = ArrayGeometry({1, 2, 4, 5, 9});
    EXPECT_THROW(root_music(true_covariance(sparse, SourceEnsemble({0.1}, {1.0}, 0.1)), sparse, 1), Error);
}

namespace {

struct LoopFixture {
    ArrayGeometry full = ArrayGeometry::ula(16);
    SourceEnsemble src = SourceEnsemble::equal_power({deg2rad(20.0)}, 10.0);
    AsnDnnConfig cfg;
    LoopFixture() { cfg.rho0 = first_k(16, 4); }
};

}  // namespace

TEST(Loop, EchoEstimatorStopsAfterOneIteration)
{
    LoopFixture f;
    double last_seen = 0.0;
    const SelectFn select = [&](double th) {
        last_seen = th;
        return first_k(16, 4);
    };
    const EstimateFn echo = [&](const CovarianceMatrix&) { return last_seen; };
    const auto r = asn_dnn_loop(select, echo, f.full, f.src, 50, f.cfg, 4);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1);
    ASSERT_EQ(r.trajectory.size(), 2u);
    EXPECT_EQ(r.trajectory[0], r.trajectory[1]);
    EXPECT_EQ(r.theta, r.trajectory[0]);
    EXPECT_NEAR(rad2deg(r.theta), 20.0, 1.0);  // MVDR initialization at 10 dB
}

TEST(Loop, WideEpsilonRunsOnce)
{
    LoopFixture f;
    f.cfg.epsilon_deg = 180.0;
    int calls = 0;
    const SelectFn select = [&](double) { return first_k(16, 4); };
    const EstimateFn est = [&](const CovarianceMatrix&) {
        ++calls;
        return deg2rad(-55.0);
    };
    const auto r = asn_dnn_loop(select, est, f.full, f.src, 50, f.cfg, 4);
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(r.iterations, 1);
    EXPECT_NEAR(r.theta, 0.5 * (r.trajectory[0] + deg2rad(-55.0)), 1e-15);
}

TEST(Loop, OscillationHitsCapAndClamps)
{
    LoopFixture f;
    f.cfg.max_iter = 5;
    int calls = 0;
    const SelectFn select = [&](double) { return first_k(16, 4); };
    const EstimateFn est = [&](const CovarianceMatrix&) { return deg2rad(++calls % 2 ? 85.0 : -85.0); };
    const auto r = asn_dnn_loop(select, est, f.full, f.src, 50, f.cfg, 4);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 5);
    EXPECT_EQ(calls, 5);
    for (double th : r.trajectory) {
        EXPECT_GE(rad2deg(th), -60.0 - 1e-12);
        EXPECT_LE(rad2deg(th), 60.0 + 1e-12);
    }
    EXPECT_GE(rad2deg(r.theta), -60.0 - 1e-12);
    EXPECT_LE(rad2deg(r.theta), 60.0 + 1e-12);
}

TEST(Loop, DeterministicAndErrors)
{
    LoopFixture f;
    const SelectFn select = [&](double) { return first_k(16, 4); };
    const auto g4 = ArrayGeometry::ula(4);
    const auto grid = search_grid(-60.0, 60.0, 0.5);
    const EstimateFn est = [&](const CovarianceMatrix& r) { return mvdr_estimate(r, g4, grid); };
    const auto a = asn_dnn_loop(select, est, f.full, f.src, 50, f.cfg, 8);
    const auto b = asn_dnn_loop(select, est, f.full, f.src, 50, f.cfg, 8);
    EXPECT_EQ(a.trajectory, b.trajectory);

    AsnDnnConfig bad = f.cfg;
    bad.epsilon_deg = 0.0;
    EXPECT_THROW(asn_dnn_loop(select, est, f.full, f.src, 50, bad, 1), Error);
    bad = f.cfg;
    bad.max_iter = 0;
    EXPECT_THROW(asn_dnn_loop(select, est, f.full, f.src, 50, bad, 1), Error);
    bad = f.cfg;
    bad.rho0.reset();
    EXPECT_THROW(asn_dnn_loop(select, est, f.full, f.src, 50, bad, 1), Error);
}

TEST(Loop, NetworkWrapperChecksShapes)
{
    const auto full = ArrayGeometry::ula(16);
    const auto src = SourceEnsemble::equal_power({0.2}, 0.0);
    const auto asn = Mlp::zeros({1, 4, 16}, Activation::Sigmoid);
    const auto dnn = Mlp::zeros({20, 4, 1}, Activation::Linear);
    const auto r = asn_dnn_estimate(asn, dnn, full, src, 20, AsnDnnConfig{}, 1);
    // Zero DNN always answers broadside; the loop converges on it.
    EXPECT_EQ(r.trajectory.back(), 0.0);
    EXPECT_THROW(asn_dnn_estimate(Mlp::zeros({1, 4, 12}, Activation::Sigmoid), dnn, full, src, 20, AsnDnnConfig{}, 1),
                 Error);
    EXPECT_THROW(asn_dnn_estimate(asn, Mlp::zeros({21, 4, 1}, Activation::Linear), full, src, 20, AsnDnnConfig{}, 1),
                 Error);
}
