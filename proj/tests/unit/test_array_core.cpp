#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "hdoa/array_core.hpp"
#include "hdoa/errors.hpp"

using namespace hdoa;

namespace {

// Noise floor used where the model would need sigma_v^2 = 0; the type forbids it.
constexpr double kTinyNoise = 1e-300;

double rel_fro(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST(Geometry, RejectsBadIndices)
{
    EXPECT_THROW(ArrayGeometry({0, 1}), Error);
    EXPECT_THROW(ArrayGeometry({2, 2}), Error);
    EXPECT_THROW(ArrayGeometry({3, 1}), Error);
    EXPECT_THROW(ArrayGeometry({1, 2}, 0.0), Error);
    EXPECT_TRUE(ArrayGeometry::ula(5).contiguous());
    EXPECT_FALSE(ArrayGeometry({1, 3}).contiguous());
}

TEST(Steering, BroadsideIsAllOnes)
{
    const CVector a = steering_vector(ArrayGeometry::ula(8), 0.0);
    ASSERT_EQ(a.size(), 8);
    for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(a(i) - cd(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Steering, EndfireLimit)
{
    const CVector a = steering_vector(ArrayGeometry({1, 2}), kPi / 2 - 1e-9);
    EXPECT_NEAR(std::abs(a(0) - cd(-1.0, 0.0)), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(a(1) - cd(1.0, 0.0)), 0.0, 1e-8);
}

TEST(Steering, ThirtyDegreesOddIndices)
{
    const CVector a = steering_vector(ArrayGeometry({1, 3, 5}), deg2rad(30.0));
    const int idx[] = {1, 3, 5};
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(a(i) - std::polar(1.0, kPi / 2 * idx[i])), 0.0, 1e-12);
}

TEST(Steering, WavelengthCancels)
{
    const CVector a = steering_vector(ArrayGeometry({1, 4, 9}, 1.0), 0.3);
    const CVector b = steering_vector(ArrayGeometry({1, 4, 9}, 0.125), 0.3);
    EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(Steering, DomainErrors)
{
    const auto g = ArrayGeometry::ula(4);
    EXPECT_THROW(steering_vector(g, kPi / 2), Error);
    EXPECT_THROW(steering_vector(g, -kPi / 2), Error);
    EXPECT_THROW(steering_vector(g, 2.0), Error);
}

TEST(Steering, UnitModulusProperty)
{
    const auto g = ArrayGeometry({1, 2, 5, 17, 40, 128});
    for (int i = -89; i <= 89; i += 7) {
        const CVector a = steering_vector(g, deg2rad(i + 0.37));
        for (Eigen::Index k = 0; k < a.size(); ++k) EXPECT_NEAR(std::abs(a(k)), 1.0, 1e-12);
    }
}

TEST(Selection, IndicesAndMatrix)
{
    const int pick[] = {1, 2, 7, 8};
    const auto s = SelectionVector::from_indices(8, pick);
    EXPECT_EQ(s.chain_count(), 4);
    EXPECT_EQ(s.indices(), (std::vector<int>{1, 2, 7, 8}));
    const Eigen::MatrixXd w = s.matrix();
    ASSERT_EQ(w.rows(), 8);
    ASSERT_EQ(w.cols(), 4);
    // rho = sum_k w_k
    const Eigen::VectorXd rho = w.rowwise().sum();
    for (int m = 0; m < 8; ++m) EXPECT_EQ(rho(m), s.rho()[static_cast<std::size_t>(m)]);
    EXPECT_EQ(w(6, 2), 1.0);
}

TEST(Selection, RejectsInvalid)
{
    EXPECT_THROW(SelectionVector({0, 2, 1}), Error);
    const int bad[] = {0};
    EXPECT_THROW(SelectionVector::from_indices(4, bad), Error);
}

TEST(Compress, Cases)
{
    const auto full8 = ArrayGeometry::ula(8);
    EXPECT_EQ(compress_geometry(full8, SelectionVector::all(8)).indices(), full8.indices());
    const int pick[] = {1, 2, 7, 8};
    EXPECT_EQ(compress_geometry(full8, SelectionVector::from_indices(8, pick)).indices(),
              (std::vector<int>{1, 2, 7, 8}));
    const int boundary[] = {1, 2, 3, 4, 125, 126, 127, 128};
    EXPECT_EQ(compress_geometry(ArrayGeometry::ula(128), SelectionVector::from_indices(128, boundary)).indices(),
              (std::vector<int>{1, 2, 3, 4, 125, 126, 127, 128}));
}

TEST(Compress, Errors)
{
    EXPECT_THROW(compress_geometry(ArrayGeometry::ula(4), SelectionVector({0, 0, 0, 0})), Error);
    EXPECT_THROW(compress_geometry(ArrayGeometry::ula(4), SelectionVector::all(5)), Error);
}

TEST(Sources, Invariants)
{
    EXPECT_THROW(SourceEnsemble({0.1, 0.1}, {1, 1}, 1.0), Error);
    EXPECT_THROW(SourceEnsemble({0.1}, {0.0}, 1.0), Error);
    EXPECT_THROW(SourceEnsemble({0.1}, {1.0}, 0.0), Error);
    EXPECT_THROW(SourceEnsemble({kPi / 2}, {1.0}, 1.0), Error);
    EXPECT_THROW(SourceEnsemble({}, {}, 1.0), Error);
    const auto s = SourceEnsemble::equal_power({0.1, 0.2}, 10.0);
    EXPECT_NEAR(s.powers[0], 10.0, 1e-12);
    EXPECT_EQ(s.noise_power, 1.0);
}

TEST(Synthesis, NoiselessSingleSnapshotIsSteering)
{
    const auto g = ArrayGeometry({1, 3, 4, 9});
    const double th = deg2rad(21.0);
    const auto y = synthesize_snapshots(g, SourceEnsemble({th}, {1.0}, kTinyNoise), 1, 7);
    const CVector a = steering_vector(g, th);
    const cd ratio = y.data(0, 0) / a(0);
    EXPECT_LT((y.data.col(0) - ratio * a).norm(), 1e-12 * std::abs(ratio));
}

TEST(Synthesis, SeedDeterminism)
{
    const auto g = ArrayGeometry::ula(6);
    const auto src = SourceEnsemble::equal_power({0.2, -0.4}, 3.0);
    const auto a = synthesize_snapshots(g, src, 50, 123);
    const auto b = synthesize_snapshots(g, src, 50, 123);
    const auto c = synthesize_snapshots(g, src, 50, 124);
    EXPECT_TRUE(a.data == b.data);
    EXPECT_FALSE(a.data == c.data);
}

TEST(Synthesis, LawOfLargeNumbers)
{
    const auto g = ArrayGeometry::ula(4);
    const auto src = SourceEnsemble({deg2rad(10.0)}, {1.0}, 1.0);
    const auto r = sample_covariance(synthesize_snapshots(g, src, 100000, 5));
    EXPECT_LT(rel_fro(r.data(), true_covariance(g, src).data()), 0.02);
}

TEST(Synthesis, ConsistencyRateProperty)
{
    const auto g = ArrayGeometry({1, 2, 5, 9});
    const auto src = SourceEnsemble({deg2rad(-33.0)}, {1.0}, 1.0);
    const CMatrix truth = true_covariance(g, src).data();
    for (int t : {100, 1000, 10000}) {
        const auto r = sample_covariance(synthesize_snapshots(g, src, t, 900 + static_cast<std::uint64_t>(t)));
        EXPECT_LE(rel_fro(r.data(), truth), 5.0 / std::sqrt(static_cast<double>(t))) << "T=" << t;
    }
}

TEST(SampleCovariance, SingleSnapshotAndZero)
{
    CMatrix y(3, 1);
    y << cd(1, 2), cd(-0.5, 0.25), cd(0, -3);
    const auto r = sample_covariance(SnapshotMatrix(y));
    EXPECT_LT((r.data() - y * y.adjoint()).norm(), 1e-14);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r.data());
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()(1), 0.0, 1e-12);

    const auto z = sample_covariance(SnapshotMatrix(CMatrix::Zero(4, 7)));
    EXPECT_EQ(z.data().norm(), 0.0);
}

TEST(CovarianceType, RejectsNonHermitianAndIndefinite)
{
    CMatrix a = CMatrix::Identity(2, 2);
    a(0, 1) = cd(0.5, 0.0);
    EXPECT_THROW(CovarianceMatrix{a}, Error);
    CMatrix b = CMatrix::Identity(2, 2);
    b(1, 1) = -1.0;
    EXPECT_THROW(CovarianceMatrix{b}, Error);
    EXPECT_THROW(CovarianceMatrix{CMatrix::Zero(2, 3)}, Error);
}

TEST(TrueCovariance, RankOneNoiseless)
{
    const auto g = ArrayGeometry::ula(2);
    const auto r = true_covariance(g, SourceEnsemble({0.4}, {1.0}, kTinyNoise));
    const CVector a = steering_vector(g, 0.4);
    EXPECT_LT((r.data() - a * a.adjoint()).norm(), 1e-12);
    EXPECT_NEAR(r.trace(), 2.0, 1e-12);
}

TEST(TrueCovariance, VanishingSourceGivesNoiseOnly)
{
    const auto r = true_covariance(ArrayGeometry::ula(5), SourceEnsemble({0.3}, {1e-300}, 2.5));
    EXPECT_LT((r.data() - 2.5 * CMatrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(TrueCovariance, MatchesBruteForceAndDiagonal)
{
    const auto g = ArrayGeometry({1, 2, 4, 8, 11});
    const auto src = SourceEnsemble({deg2rad(-40.0), deg2rad(25.0)}, {2.0, 0.5}, 0.7);
    const CMatrix r = true_covariance(g, src).data();
    // Element-wise sum over sources, no matrix products.
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            cd e = i == j ? cd(0.7, 0.0) : cd(0.0, 0.0);
            for (int q = 0; q < 2; ++q) {
                const double u = std::sin(src.angles[static_cast<std::size_t>(q)]);
                const int di = g.indices()[static_cast<std::size_t>(i)] - g.indices()[static_cast<std::size_t>(j)];
                e += src.powers[static_cast<std::size_t>(q)] * std::polar(1.0, kPi * di * u);
            }
            EXPECT_NEAR(std::abs(r(i, j) - e), 0.0, 1e-12);
        }
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(r(i, i).real(), 2.0 + 0.5 + 0.7, 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
    EXPECT_GE(es.eigenvalues().minCoeff(), 0.7 - 1e-10);
}
