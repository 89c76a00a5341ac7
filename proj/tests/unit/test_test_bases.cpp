#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "generators.hpp"
#include "homog/error.hpp"
#include "homog/test_bases.hpp"

using namespace homog;
using homog::testkit::Gen;

TEST(Spectral, PaperCardinalities) {
    EXPECT_EQ(build_spectral(5, 5).size(), 70u);
    EXPECT_EQ(build_spectral(7, 7).size(), 126u);
    EXPECT_EQ(build_spectral(1, 1).size(), 6u);
    EXPECT_THROW(build_spectral(0, 3), ConfigError);
}

TEST(SpectralProperty, CardinalityFormula) {
    for (int m = 1; m <= 8; ++m)
        for (int n = 1; n <= 8; ++n)
            EXPECT_EQ(build_spectral(m, n).size(), static_cast<std::size_t>(2 * ((m + 1) * (n + 1) - 1)));
}

TEST(Spectral, NonNegativeFrequenciesOnly) {
    const auto b = build_spectral(3, 2);
    for (const auto& md : b.modes()) {
        EXPECT_GE(md.m, 0);
        EXPECT_GE(md.n, 0);
        EXPECT_FALSE(md.m == 0 && md.n == 0);
    }
}

TEST(Spectral, ValuesAndGradients) {
    const auto b = build_spectral(2, 2);
    Gen g(1);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const auto& md = b.modes()[k];
        const Vec2 x = g.point();
        const double arg = md.m * x[0] + md.n * x[1];
        EXPECT_NEAR(b.value(k, x), md.sine ? std::sin(arg) : std::cos(arg), 1e-14);
        const double d = md.sine ? std::cos(arg) : -std::sin(arg);
        EXPECT_NEAR(b.gradient(k, x)[0], md.m * d, 1e-14);
        EXPECT_NEAR(b.gradient(k, x)[1], md.n * d, 1e-14);
    }
}

TEST(SpectralProperty, PeriodicAndZeroMean) {
    const auto b = build_spectral(4, 4);
    const CollocationGrid grid(32);
    Gen g(2);
    for (std::size_t k = 0; k < b.size(); ++k) {
        for (int t = 0; t < 100; ++t) {
            const Vec2 x = g.point();
            EXPECT_NEAR(b.value(k, x + Vec2(2 * kPi, 0)), b.value(k, x), 1e-12);
            EXPECT_NEAR(b.value(k, x + Vec2(0, 2 * kPi)), b.value(k, x), 1e-12);
        }
        double mean = 0.0;
        for (std::size_t p = 0; p < grid.size(); ++p) mean += b.value(k, grid.point(p));
        EXPECT_NEAR(mean / grid.size(), 0.0, 1e-13);
    }
}

TEST(Spectral, InverseGramDiagonal) {
    const auto b = build_spectral(2, 2);
    const auto d = spectral_inverse_gram_diag(b);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const auto& md = b.modes()[k];
        EXPECT_DOUBLE_EQ(d[k], 1.0 / (md.m * md.m + md.n * md.n));
        if (md.m == 1 && md.n == 0) {
            EXPECT_EQ(d[k], 1.0);
        }
        if (md.m == 1 && md.n == 1) {
            EXPECT_EQ(d[k], 0.5);
        }
    }
}

TEST(Spectral, NumericGramIsScaledAnalyticDiagonal) {
    const CollocationGrid grid;
    const auto b = build_spectral(5, 5);
    const Gram g = numeric_gram(basis_gradients(b, grid), grid);
    const Eigen::MatrixXd& m = g.matrix();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& md = b.modes()[i];
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            if (i == j) {
                EXPECT_NEAR(m(ii, jj), 2 * kPi * kPi * (md.m * md.m + md.n * md.n), 1e-9);
            } else {
                EXPECT_LE(std::abs(m(ii, jj)), 1e-10);
            }
        }
    }
    const Gram fallback = gram_fallback_diagonal(basis_gradients(b, grid), grid);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(fallback.diagonal_entries()[static_cast<Eigen::Index>(i)],
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)), 1e-13 * m.diagonal().maxCoeff());
    }
    const Gram analytic = spectral_gram(b);
    const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(b.size()), -1, 1);
    EXPECT_NEAR(r.dot(analytic.solve(r)) / (2 * kPi * kPi), r.dot(g.solve(r)), 1e-12);
}

TEST(NetworkBasis, DeterministicAndDistinct) {
    const auto a = build_network_basis(testkit::kNet65, 4, 10);
    const auto b = build_network_basis(testkit::kNet65, 4, 10);
    ASSERT_EQ(a.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_TRUE(std::equal(a.members[k].params().begin(), a.members[k].params().end(),
                               b.members[k].params().begin()));
        const auto ref = PeriodicNet::init(testkit::kNet65, 10 + k);
        EXPECT_TRUE(std::equal(ref.params().begin(), ref.params().end(), a.members[k].params().begin()));
    }
    EXPECT_FALSE(std::equal(a.members[0].params().begin(), a.members[0].params().end(),
                            a.members[1].params().begin()));
    EXPECT_THROW(build_network_basis(testkit::kNet65, 0, 1), ConfigError);
}

TEST(NetworkBasis, GradientsMatchPointwiseJets) {
    const CollocationGrid grid(8);
    const auto basis = build_network_basis(testkit::kNet65, 3, 5);
    const auto grads = basis_gradients(basis, grid);
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const Jet2 y = basis.members[k].forward(grid.point(p));
            EXPECT_NEAR(grads.d1(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)), y.grad(0), 1e-13);
            EXPECT_NEAR(grads.d2(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)), y.grad(1), 1e-13);
        }
    }
}

TEST(Gram, SingleMemberIsPositiveScalar) {
    const CollocationGrid grid(32);
    const auto basis = build_network_basis(testkit::kNet65, 1, 3);
    const Gram g = numeric_gram(basis_gradients(basis, grid), grid);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_GT(g.matrix()(0, 0), 0.0);
}

TEST(Gram, TenMembersArePositiveDefinite) {
    const CollocationGrid grid;
    const auto basis = build_network_basis(testkit::kNet65, 10, 21);
    const Gram g = numeric_gram(basis_gradients(basis, grid), grid);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix());
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    EXPECT_NEAR(g.min_eigenvalue(), es.eigenvalues().minCoeff(), 1e-10 * es.eigenvalues().maxCoeff());
}

TEST(Gram, DuplicateMemberIsSingular) {
    const CollocationGrid grid(32);
    auto basis = build_network_basis(testkit::kNet65, 3, 8);
    basis.members.push_back(basis.members[1]);
    const auto grads = basis_gradients(basis, grid);
    const Gram g = numeric_gram(grads, grid);
    EXPECT_LE(g.min_eigenvalue(), 1e-12 * g.max_eigenvalue());
    const auto sel = select_gram(grads, grid, 1e-10);
    EXPECT_TRUE(sel.fallback);
    EXPECT_EQ(sel.gram.form(), GramForm::diagonal);
    EXPECT_FALSE(sel.note.empty());
}

TEST(GramProperty, SymmetricAndPsd) {
    Gen g(3);
    const CollocationGrid grid(32);
    for (int trial = 0; trial < 5; ++trial) {
        const auto basis = build_network_basis(testkit::kNet391, 8, g.seed());
        const Gram gram = numeric_gram(basis_gradients(basis, grid), grid);
        const Eigen::MatrixXd& m = gram.matrix();
        EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-14 * m.cwiseAbs().maxCoeff());
        EXPECT_GE(gram.min_eigenvalue(), -1e-10 * gram.max_eigenvalue());
    }
}

TEST(GramProperty, Bilinearity) {
    Gen g(4);
    const CollocationGrid grid(32);
    const auto grads = basis_gradients(build_network_basis(testkit::kNet65, 6, 99), grid);
    const Gram base = numeric_gram(grads, grid);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd t(6, 6);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = g.uniform(-1, 1);
        const BasisGradients mixed{t * grads.d1, t * grads.d2};
        const Eigen::MatrixXd expect = t * base.matrix() * t.transpose();
        EXPECT_LE((numeric_gram(mixed, grid).matrix() - expect).norm(), 1e-10 * expect.norm());
    }
}

TEST(GramFallback, PositiveEntriesAndConstantRejected) {
    const CollocationGrid grid(16);
    const auto grads = basis_gradients(build_network_basis(testkit::kNet65, 5, 1), grid);
    const Gram d = gram_fallback_diagonal(grads, grid);
    EXPECT_GT(d.diagonal_entries().minCoeff(), 0.0);
    BasisGradients with_constant = grads;
    with_constant.d1.row(2).setZero();
    with_constant.d2.row(2).setZero();
    EXPECT_THROW(gram_fallback_diagonal(with_constant, grid), ConfigError);
}

TEST(GramFallback, SmallNetworkWithHundredMembersTriggers) {
    const CollocationGrid grid;
    const auto grads = basis_gradients(build_network_basis(testkit::kNet65, 100, 0), grid);
    const auto sel = select_gram(grads, grid, 1e-10);
    EXPECT_TRUE(sel.fallback) << "relative conditioning " << sel.relative_conditioning;
    EXPECT_LE(sel.relative_conditioning, 1e-10);
}
