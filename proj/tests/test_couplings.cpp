#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "aot/couplings.h"
#include "aot/metrics.h"
#include "test_helpers.h"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace aot;
using testutil::random_block_factor;
using testutil::random_contraction;
using testutil::random_martingale_factor;
using testutil::random_matrix;

namespace {

FilteredGaussianProcess centered(const BlockLowerCholesky& L) {
    return FilteredGaussianProcess(L);
}

// factor with well-conditioned diagonal blocks, so the path map is invertible
BlockLowerCholesky invertible_factor(Eigen::Index N, Eigen::Index d, std::mt19937_64& gen) {
    BlockLowerCholesky L = random_block_factor(N, d, gen);
    L.A += 3.0 * MatrixXd::Identity(N * d, N * d);
    return L;
}

double scalar_block(const MatrixXd& B) { return B(0, 0); }

}  // namespace

TEST_SUITE("couplings") {

TEST_CASE("coupling cost on scalar instance") {
    BlockLowerCholesky L(1, 1), M(1, 1);
    L.A << 2;
    M.A << 3;
    for (double rho : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
        BlockCorrelation P;
        P.blocks.push_back(MatrixXd::Constant(1, 1, rho));
        CHECK(coupling_cost(centered(L), centered(M), P) ==
              doctest::Approx(13.0 - 12.0 * rho).epsilon(1e-12));
        FullCorrelation dense = MatrixXd::Constant(1, 1, rho);
        CHECK(coupling_cost(centered(L), centered(M), dense) ==
              doctest::Approx(13.0 - 12.0 * rho).epsilon(1e-12));
    }
}

TEST_CASE("independent and synchronous costs") {
    std::mt19937_64 gen(100);
    for (int trial = 0; trial < 100; ++trial) {
        int N = 1 + int(gen() % 3), d = 1 + int(gen() % 3);
        FilteredGaussianProcess X(random_block_factor(N, d, gen));
        FilteredGaussianProcess Y(random_block_factor(N, d, gen));
        X.mean = VectorXd::LinSpaced(N * d, -1.0, 1.0);

        double indep = coupling_cost(X, Y, BlockCorrelation::zero(N, d));
        double want = (X.mean - Y.mean).squaredNorm() + X.factor.frob_squared() +
                      Y.factor.frob_squared();
        CHECK(indep == doctest::Approx(want).epsilon(1e-12));

        double sync = coupling_cost(X, Y, BlockCorrelation::identity(N, d));
        double want_sync =
            (X.mean - Y.mean).squaredNorm() + (X.factor.A - Y.factor.A).squaredNorm();
        CHECK(sync == doctest::Approx(want_sync).epsilon(1e-10));

        // synchronous beats independent exactly when the factors correlate
        double cross = (X.factor.A.transpose() * Y.factor.A).trace();
        if (std::abs(cross) > 1e-12) CHECK(((sync < indep) == (cross > 0.0)));
    }
}

TEST_CASE("correlation validation") {
    BlockCorrelation P = BlockCorrelation::identity(2, 2);
    validate_correlation(P);
    P.blocks[1] *= 1.2;
    CHECK_THROWS_AS(validate_correlation(P), NumericError);

    BlockCorrelation ragged;
    ragged.blocks.push_back(MatrixXd::Identity(2, 2));
    ragged.blocks.push_back(MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(validate_correlation(ragged), InputError);

    BlockCorrelation rect;
    rect.blocks.push_back(MatrixXd::Zero(2, 3));
    CHECK_THROWS_AS(validate_correlation(rect), InputError);

    std::mt19937_64 gen(101);
    BlockLowerCholesky L = random_block_factor(2, 2, gen);
    CHECK_THROWS_AS(coupling_cost(centered(L), centered(L), BlockCorrelation::zero(3, 2)),
                    InputError);
    FullCorrelation big = 1.5 * MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(coupling_cost(centered(L), centered(L), big), NumericError);
}

TEST_CASE("aw-optimal correlation on frozen cases") {
    BlockLowerCholesky I2(2, 1);
    I2.A.setIdentity();
    BlockCorrelation P = optimal_aw_correlation(I2, I2);
    REQUIRE(P.steps() == 2);
    CHECK(scalar_block(P.blocks[0]) == doctest::Approx(1.0));
    CHECK(scalar_block(P.blocks[1]) == doctest::Approx(1.0));

    BlockLowerCholesky L(2, 1), M(2, 1);
    L.A << 1, 0, 1, 0;
    M.A << 0, 0, 1, 0;
    P = optimal_aw_correlation(L, M);
    CHECK(scalar_block(P.blocks[0]) == doctest::Approx(1.0));
    double cost = coupling_cost(centered(L), centered(M), P);
    CHECK(cost == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(cost == doctest::Approx(dist_aw_squared(L, M)).epsilon(1e-10));
}

TEST_CASE("aw-optimal correlation attains the metric on random pairs") {
    std::mt19937_64 gen(102);
    for (int trial = 0; trial < 200; ++trial) {
        int N = 1 + int(gen() % 4), d = 1 + int(gen() % 3);
        FilteredGaussianProcess X(random_block_factor(N, d, gen));
        FilteredGaussianProcess Y(random_block_factor(N, d, gen));
        Y.mean = VectorXd::LinSpaced(N * d, 0.0, 2.0);
        BlockCorrelation P = optimal_aw_correlation(X.factor, Y.factor);
        validate_correlation(P);
        double aw = aw2_filtered(X, Y);
        CHECK(coupling_cost(X, Y, P) == doctest::Approx(aw * aw).epsilon(1e-8));
    }
}

TEST_CASE("classical brenier correlation") {
    std::mt19937_64 gen(103);
    BlockLowerCholesky L = invertible_factor(2, 2, gen);
    FullCorrelation P = classical_brenier_correlation(L, L);
    CHECK((P - MatrixXd::Identity(4, 4)).norm() < 1e-8);
    CHECK(coupling_cost(centered(L), centered(L), P) == doctest::Approx(0.0).epsilon(1e-10));

    // diagonal factors: the correlation is the diagonal sign pattern
    BlockLowerCholesky D1(3, 1), D2(3, 1);
    D1.A = Eigen::Vector3d(1, -2, 3).asDiagonal();
    D2.A = Eigen::Vector3d(4, 5, -6).asDiagonal();
    P = classical_brenier_correlation(D1, D2);
    MatrixXd signs = Eigen::Vector3d(1, -1, -1).asDiagonal();
    CHECK((P - signs).norm() < 1e-10);

    for (int trial = 0; trial < 200; ++trial) {
        int N = 1 + int(gen() % 3), d = 1 + int(gen() % 3);
        BlockLowerCholesky A = random_block_factor(N, d, gen);
        BlockLowerCholesky B = random_block_factor(N, d, gen);
        P = classical_brenier_correlation(A, B);
        CHECK(spectral_norm(P) <= 1.0 + 1e-9);
        CHECK(coupling_cost(centered(A), centered(B), P) ==
              doctest::Approx(bw_squared_factors(A.A, B.A)).epsilon(1e-8));
    }
}

TEST_CASE("adapted brenier on the frozen scalar example") {
    BlockLowerCholesky L(2, 1), M(2, 1);
    L.A << 1, 0, 1, 1;
    M.A << 1, 0, -2, 1;
    BlockCorrelation P = adapted_brenier_correlation(L, M);
    CHECK(scalar_block(P.blocks[0]) == doctest::Approx(1.0));
    CHECK(scalar_block(P.blocks[1]) == doctest::Approx(1.0));
    CHECK(adapted_brenier_divergence(L, M) == doctest::Approx(9.0).epsilon(1e-10));
    CHECK(dist_aw_squared(L, M) == doctest::Approx(5.0).epsilon(1e-10));
    CHECK_FALSE(ab_attains_aw(L, M));
    CHECK(coupling_cost(centered(L), centered(M), P) == doctest::Approx(9.0).epsilon(1e-10));
}

TEST_CASE("adapted brenier fixed points and martingale optimality") {
    std::mt19937_64 gen(104);
    for (int trial = 0; trial < 50; ++trial) {
        int N = 1 + int(gen() % 3), d = 1 + int(gen() % 3);
        BlockLowerCholesky L = invertible_factor(N, d, gen);
        BlockCorrelation P = adapted_brenier_correlation(L, L);
        for (const MatrixXd& B : P.blocks) CHECK((B - MatrixXd::Identity(d, d)).norm() < 1e-8);
        CHECK(adapted_brenier_divergence(L, L) == doctest::Approx(0.0).epsilon(1e-8));
        CHECK(ab_attains_aw(L, L, 1e-7));
    }
    for (int trial = 0; trial < 100; ++trial) {
        int N = 1 + int(gen() % 4), d = 1 + int(gen() % 3);
        BlockLowerCholesky L = random_martingale_factor(N, d, gen);
        BlockLowerCholesky M = random_martingale_factor(N, d, gen);
        double div = adapted_brenier_divergence(L, M);
        CHECK(div == doctest::Approx(dist_aw_squared(L, M)).epsilon(1e-8));
        CHECK(ab_attains_aw(L, M, 1e-7));
    }
}

TEST_CASE("scalar adapted brenier against exhaustive sign patterns") {
    std::mt19937_64 gen(105);
    for (int trial = 0; trial < 100; ++trial) {
        int N = 1 + int(gen() % 6);
        BlockLowerCholesky L = random_block_factor(N, 1, gen);
        BlockLowerCholesky M = random_block_factor(N, 1, gen);
        double div = adapted_brenier_divergence(L, M);
        CHECK(div == doctest::Approx(coupling_cost(centered(L), centered(M),
                                                   adapted_brenier_correlation(L, M)))
                         .epsilon(1e-10));

        // the metric is the best over all sign patterns; the map correlation is
        // pinned to the diagonal signs, so it can only do worse
        double best = 1e300;
        for (int mask = 0; mask < (1 << N); ++mask) {
            BlockCorrelation S = BlockCorrelation::identity(N, 1);
            for (int t = 0; t < N; ++t)
                if (mask & (1 << t)) S.blocks[t](0, 0) = -1.0;
            best = std::min(best, coupling_cost(centered(L), centered(M), S));
        }
        CHECK(best == doctest::Approx(dist_aw_squared(L, M)).epsilon(1e-9));
        CHECK(div >= best - 1e-9);

        bool signs_agree = true;
        for (int t = 0; t < N; ++t) {
            double diag = L.block(t, t)(0, 0) * M.block(t, t)(0, 0);
            double cross = BlockLowerCholesky::cross_diag_block(L, M, t)(0, 0);
            if (diag * cross < 0.0) signs_agree = false;
        }
        if (signs_agree) CHECK(div == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("adapted brenier blocks are orthogonal") {
    std::mt19937_64 gen(111);
    for (int trial = 0; trial < 100; ++trial) {
        int N = 1 + int(gen() % 3), d = 1 + int(gen() % 3);
        BlockLowerCholesky L = random_block_factor(N, d, gen);
        BlockLowerCholesky M = random_block_factor(N, d, gen);
        if (trial % 3 == 0) L.set_block(0, 0, MatrixXd::Zero(d, d));
        BlockCorrelation P = adapted_brenier_correlation(L, M);
        for (const MatrixXd& B : P.blocks)
            CHECK((B.transpose() * B - MatrixXd::Identity(d, d)).norm() < 1e-10);
    }
}

TEST_CASE("scalar divergence equals the sign-constrained procrustes value") {
    std::mt19937_64 gen(112);
    for (int trial = 0; trial < 100; ++trial) {
        int N = 1 + int(gen() % 6);
        BlockLowerCholesky L = random_block_factor(N, 1, gen);
        BlockLowerCholesky M = random_block_factor(N, 1, gen);
        if (trial % 3 == 0) L.set_block(0, 0, MatrixXd::Zero(1, 1));
        if (trial % 5 == 0) M.set_block(N - 1, N - 1, MatrixXd::Zero(1, 1));

        // sign patterns restricted per step: pinned to sgn(L_tt M_tt) when the
        // diagonal product is nonzero, free otherwise
        double best = 1e300;
        for (int mask = 0; mask < (1 << N); ++mask) {
            MatrixXd Q = MatrixXd::Identity(N, N);
            bool admissible = true;
            for (int t = 0; t < N; ++t) {
                double q = (mask & (1 << t)) ? -1.0 : 1.0;
                double diag = L.block(t, t)(0, 0) * M.block(t, t)(0, 0);
                if (diag != 0.0 && q * diag < 0.0) admissible = false;
                Q(t, t) = q;
            }
            if (admissible) best = std::min(best, (L.A - M.A * Q).squaredNorm());
        }
        CHECK(adapted_brenier_divergence(L, M) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("cost hierarchy on random pairs") {
    std::mt19937_64 gen(106);
    for (int trial = 0; trial < 1000; ++trial) {
        int N = 1 + int(gen() % 3), d = 1 + int(gen() % 2);
        BlockLowerCholesky L = random_block_factor(N, d, gen);
        BlockLowerCholesky M = random_block_factor(N, d, gen);
        double bw2 = bw_squared_factors(L.A, M.A);
        double aw2 = dist_aw_squared(L, M);
        double dab = adapted_brenier_divergence(L, M);
        CHECK(bw2 <= aw2 + 1e-9);
        CHECK(aw2 <= dab + 1e-9);

        for (int rep = 0; rep < 3; ++rep) {
            BlockCorrelation P;
            for (int t = 0; t < N; ++t) P.blocks.push_back(random_contraction(d, gen));
            CHECK(aw2 <= coupling_cost(centered(L), centered(M), P) + 1e-9);
        }
    }
}

TEST_CASE("synchronous sampling is the noise identity") {
    std::mt19937_64 gen(107);
    BlockLowerCholesky L = invertible_factor(3, 2, gen);
    BlockLowerCholesky M = random_block_factor(3, 2, gen);
    VectorXd a = VectorXd::LinSpaced(6, 0.0, 1.0), b = VectorXd::LinSpaced(6, -1.0, 1.0);
    FilteredGaussianProcess X(a, L), Y(b, M);

    CoupledPaths S = sample_coupled_paths(X, Y, BlockCorrelation::identity(3, 2), 200, 7);
    REQUIRE(S.x.rows() == 200);
    REQUIRE(S.y.rows() == 200);
    MatrixXd R = (M.A - L.A) * L.A.inverse();
    MatrixXd want = S.x;
    want.rowwise() += (b - a).transpose();
    MatrixXd centered_x = S.x;
    centered_x.rowwise() -= a.transpose();
    want += centered_x * R.transpose();
    CHECK((S.y - want).norm() < 1e-8);
}

TEST_CASE("sampling is seed-deterministic") {
    std::mt19937_64 gen(108);
    FilteredGaussianProcess X(random_block_factor(2, 2, gen));
    FilteredGaussianProcess Y(random_block_factor(2, 2, gen));
    BlockCorrelation P = optimal_aw_correlation(X.factor, Y.factor);
    CoupledPaths s1 = sample_coupled_paths(X, Y, P, 50, 42);
    CoupledPaths s2 = sample_coupled_paths(X, Y, P, 50, 42);
    CHECK((s1.x - s2.x).norm() == 0.0);
    CHECK((s1.y - s2.y).norm() == 0.0);
    CoupledPaths s3 = sample_coupled_paths(X, Y, P, 50, 43);
    CHECK((s1.x - s3.x).norm() != 0.0);

    CHECK_THROWS_AS(sample_coupled_paths(X, Y, P, 0, 1), InputError);
}

TEST_CASE("independent sampling decorrelates the paths") {
    BlockLowerCholesky I(2, 2);
    I.A.setIdentity();
    FilteredGaussianProcess X(I);
    const Eigen::Index n = 1000000;
    CoupledPaths S = sample_coupled_paths(X, X, BlockCorrelation::zero(2, 2), n, 9);
    MatrixXd cross = S.x.transpose() * S.y / double(n);
    CHECK(cross.cwiseAbs().maxCoeff() <= 5e-3);
}

TEST_CASE("sampled cost agrees with the analytic cost for every family") {
    std::mt19937_64 gen(109);
    BlockLowerCholesky L = random_block_factor(3, 2, gen);
    BlockLowerCholesky M = random_block_factor(3, 2, gen);
    VectorXd a = VectorXd::LinSpaced(6, 0.0, 0.5), b = VectorXd::Zero(6);
    FilteredGaussianProcess X(a, L), Y(b, M);
    const Eigen::Index n = 100000;

    std::vector<BlockCorrelation> families;
    families.push_back(BlockCorrelation::zero(3, 2));
    families.push_back(BlockCorrelation::identity(3, 2));
    families.push_back(optimal_aw_correlation(L, M));
    families.push_back(adapted_brenier_correlation(L, M));

    std::uint64_t seed = 11;
    for (const BlockCorrelation& P : families) {
        double want = coupling_cost(X, Y, P);
        CoupledPaths S = sample_coupled_paths(X, Y, P, n, seed++);
        VectorXd sq = (S.x - S.y).rowwise().squaredNorm();
        double mean = sq.mean();
        double se = std::sqrt((sq.array() - mean).square().sum() / double(n - 1) / double(n));
        CHECK(std::abs(mean - want) <= 3.0 * se);
    }

    // the classical coupling, realized by collapsing the steps into one
    FullCorrelation P = classical_brenier_correlation(L, M);
    double want = coupling_cost(X, Y, P);
    FilteredGaussianProcess Xw(a, BlockLowerCholesky::from_matrix(1, 6, L.A));
    FilteredGaussianProcess Yw(b, BlockLowerCholesky::from_matrix(1, 6, M.A));
    BlockCorrelation wrap;
    wrap.blocks.push_back(P);
    CoupledPaths S = sample_coupled_paths(Xw, Yw, wrap, n, seed);
    VectorXd sq = (S.x - S.y).rowwise().squaredNorm();
    double mean = sq.mean();
    double se = std::sqrt((sq.array() - mean).square().sum() / double(n - 1) / double(n));
    CHECK(std::abs(mean - want) <= 3.0 * se);
}

TEST_CASE("scalar adapted brenier transports each step monotonically") {
    std::mt19937_64 gen(110);
    for (int rep = 0; rep < 5; ++rep) {
        int N = 3;
        BlockLowerCholesky L = invertible_factor(N, 1, gen);
        BlockLowerCholesky M = invertible_factor(N, 1, gen);
        if (rep % 2) M.A.row(2) *= -1.0;  // mix the diagonal signs
        FilteredGaussianProcess X(L), Y(M);
        BlockCorrelation P = adapted_brenier_correlation(L, M);
        CoupledPaths S = sample_coupled_paths(X, Y, P, 2000, 21 + rep);

        for (int t = 0; t < N; ++t) {
            // y_t is an affine function of (x_1..x_t) with a positive
            // coefficient on x_t: the per-step map is increasing
            MatrixXd design(2000, t + 2);
            design.col(0).setOnes();
            design.rightCols(t + 1) = S.x.leftCols(t + 1);
            VectorXd coef = design.completeOrthogonalDecomposition().solve(S.y.col(t));
            CHECK((design * coef - S.y.col(t)).norm() < 1e-8);
            CHECK(coef(t + 1) > 0.0);
        }
    }
}

}  // TEST_SUITE
