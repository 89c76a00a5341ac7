#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "generators.hpp"
#include "homog/bounds.hpp"
#include "homog/fem.hpp"

using namespace homog;
using homog::testkit::Gen;

namespace {

const Vec2 e1(1.0, 0.0);

// Dense oracle: same system, constant mode removed by pinning DoF 0 and
// solving the reduced system with a dense LU, then shifting to zero mean.
Eigen::VectorXd dense_solve(const SparseSystem& s) {
    const Eigen::MatrixXd k = Eigen::MatrixXd(s.stiffness);
    const Eigen::Index n = k.rows();
    const Eigen::MatrixXd kr = k.bottomRightCorner(n - 1, n - 1);
    const Eigen::VectorXd br = s.rhs.tail(n - 1);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u.tail(n - 1) = kr.fullPivLu().solve(br);
    u.array() -= u.mean();
    return u;
}

}  // namespace

TEST(Mesh, CountsAndArea) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    EXPECT_EQ(mesh.triangles().size(), 128u);
    EXPECT_EQ(mesh.dof_count(), 64u);
    EXPECT_NEAR(mesh.triangle_area() * mesh.triangles().size(), 4 * kPi * kPi, 1e-12);
}

TEST(Mesh, AlignmentRequired) {
    const auto m = MaterialField::piecewise({1.0, 0.1});
    EXPECT_THROW(build_mesh(9, m), ConfigError);
    EXPECT_THROW(build_mesh(6, m), ConfigError);
    EXPECT_THROW(build_mesh(0, m), ConfigError);
    EXPECT_NO_THROW(build_mesh(4, m));
}

TEST(Mesh, InclusionTriangleCount) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    int inc = 0;
    for (const auto& t : mesh.triangles()) inc += t.conductivity(0, 0) == 0.1;
    EXPECT_EQ(inc, 32);
    const auto fine = build_mesh(32, MaterialField::piecewise({1.0, 0.1}));
    inc = 0;
    for (const auto& t : fine.triangles()) inc += t.conductivity(0, 0) == 0.1;
    EXPECT_EQ(inc, 2 * 16 * 16);
}

TEST(Mesh, HomogeneousSharesTensor) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({0.3, 0.3}));
    for (const auto& t : mesh.triangles()) EXPECT_EQ(t.conductivity, 0.3 * Mat2::Identity());
}

TEST(Mesh, PeriodicDofMap) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    for (int j = 0; j <= 8; ++j) EXPECT_EQ(mesh.dof(8, j), mesh.dof(0, j));
    for (int i = 0; i <= 8; ++i) EXPECT_EQ(mesh.dof(i, 8), mesh.dof(i, 0));
    EXPECT_EQ(mesh.dof(3, 2), 3 + 8 * 2);
}

TEST(Mesh, GradientIsStructuredDifference) {
    Gen g(1);
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    Eigen::VectorXd u(64);
    for (Eigen::Index k = 0; k < 64; ++k) u[k] = g.uniform(-1, 1);
    const double h = mesh.spacing();
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
            auto val = [&](int a, int b) { return u[mesh.dof(a, b)]; };
            const std::size_t t = 2 * static_cast<std::size_t>(i + 8 * j);
            const Vec2 ga = mesh.gradient(u, t), gb = mesh.gradient(u, t + 1);
            EXPECT_NEAR(ga[0], (val(i + 1, j) - val(i, j)) / h, 1e-13);
            EXPECT_NEAR(ga[1], (val(i + 1, j + 1) - val(i + 1, j)) / h, 1e-13);
            EXPECT_NEAR(gb[0], (val(i + 1, j + 1) - val(i, j + 1)) / h, 1e-13);
            EXPECT_NEAR(gb[1], (val(i, j + 1) - val(i, j)) / h, 1e-13);
        }
    }
}

TEST(Assemble, HomogeneousRhsVanishes) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({2.0, 2.0}));
    EXPECT_LE(assemble_primal(mesh, e1).rhs.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(assemble_dual(mesh, e1).rhs.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Assemble, ConstantsInNullSpaceAndSymmetric) {
    const auto mesh = build_mesh(16, MaterialField::piecewise({1.0, 0.1}));
    for (const auto& s : {assemble_primal(mesh, e1), assemble_dual(mesh, e1)}) {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.rhs.size());
        EXPECT_LE((s.stiffness * ones).cwiseAbs().maxCoeff(), 1e-12);
        const Eigen::MatrixXd k(s.stiffness);
        EXPECT_LE((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
        EXPECT_GE(es.eigenvalues()[0], -1e-12);
        EXPECT_GT(es.eigenvalues()[1], 1e-8);
    }
}

TEST(Assemble, HomogeneousDualIsScaledPrimal) {
    const double c = 3.0;
    const auto mesh = build_mesh(8, MaterialField::piecewise({c, c}));
    const Eigen::MatrixXd kp(assemble_primal(mesh, e1).stiffness);
    const Eigen::MatrixXd kd(assemble_dual(mesh, e1).stiffness);
    EXPECT_LE((kd - kp / (c * c)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Solve, MatchesDenseOracle) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    for (const auto& s : {assemble_primal(mesh, e1), assemble_dual(mesh, e1), assemble_primal(mesh, Vec2(0.6, 0.8))}) {
        const auto r = solve(s);
        EXPECT_LE((r.solution - dense_solve(s)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE(r.residual_history.back(), 1e-10);
    }
}

TEST(Solve, HomogeneousGivesZeroFluctuation) {
    const auto mesh = build_mesh(16, MaterialField::piecewise({1.7, 1.7}));
    EXPECT_LE(solve(assemble_primal(mesh, e1)).solution.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(solve(assemble_dual(mesh, e1)).solution.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Solve, PinnedDofDoesNotMatter) {
    const auto mesh = build_mesh(16, MaterialField::piecewise({1.0, 0.1}));
    const auto s = assemble_primal(mesh, e1);
    SolveOptions a, b;
    b.pinned_dof = 7;
    EXPECT_LE((solve(s, a).solution - solve(s, b).solution).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Solve, IterationCapReportsHistory) {
    const auto mesh = build_mesh(32, MaterialField::piecewise({1.0, 0.1}));
    SolveOptions opt;
    opt.max_iterations = 3;
    try {
        solve(assemble_primal(mesh, e1), opt);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.residual_history().size(), 3u);
    }
}

TEST(FemBounds, HomogeneousIsExact) {
    const double c = 0.8;
    const auto mesh = build_mesh(8, MaterialField::piecewise({c, c}));
    const auto up = solve(assemble_primal(mesh, e1)).solution;
    const auto lo = solve(assemble_dual(mesh, e1)).solution;
    const auto r = fem_bounds(mesh, up, lo, e1, e1);
    EXPECT_NEAR(r.upper_bound, c, 1e-14);
    EXPECT_NEAR(r.lower_bound, c, 1e-14);
}

TEST(FemBounds, ZeroFieldsGiveVoigtReuss) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(64);
    const auto r = fem_bounds(mesh, z, z, e1, e1);
    EXPECT_NEAR(r.upper_bound, 0.775, 1e-14);
    EXPECT_NEAR(r.lower_bound, 1.0 / 3.25, 1e-14);
}

TEST(FemBounds, EnergyIdentity) {
    for (int n : {8, 32}) {
        const auto mesh = build_mesh(n, MaterialField::piecewise({1.0, 0.1}));
        for (bool dual : {false, true}) {
            const auto s = dual ? assemble_dual(mesh, e1) : assemble_primal(mesh, e1);
            const auto u = solve(s).solution;
            const double from_system = (s.energy_constant - s.rhs.dot(u)) / UnitCell::area;
            const double direct = dual ? dual_energy(mesh, u, e1) : primal_energy(mesh, u, e1);
            EXPECT_NEAR(from_system, direct, 1e-10 * direct);
        }
    }
}

TEST(FemBounds, OrderingAndMonotoneGapUnderRefinement) {
    const double exact = obnosov_effective({1.0, 0.1});
    double prev_gap = 1e9;
    Eigen::VectorXd coarse;
    for (int n : {8, 16, 32, 64, 128}) {
        const auto mesh = build_mesh(n, MaterialField::piecewise({1.0, 0.1}));
        const auto up = solve(assemble_primal(mesh, e1)).solution;
        const auto lo = solve(assemble_dual(mesh, e1)).solution;
        const auto r = fem_bounds(mesh, up, lo, e1, e1);
        EXPECT_LE(r.lower_bound, exact + 1e-12) << n;
        EXPECT_GE(r.upper_bound, exact - 1e-12) << n;
        const double gap = r.upper_bound - r.lower_bound;
        EXPECT_LE(gap, prev_gap) << n;
        prev_gap = gap;
        if (n == 128) {
            EXPECT_LE(std::abs(r.upper_bound / exact - 1), 4e-4);
            EXPECT_LE(std::abs(r.lower_bound / exact - 1), 4e-4);
            // the n = 64 solution sampled at shared nodes stays close
            double diff = 0.0;
            for (int j = 0; j < 64; ++j)
                for (int i = 0; i < 64; ++i) diff = std::max(diff, std::abs(up[mesh.dof(2 * i, 2 * j)] - coarse[i + 64 * j]));
            EXPECT_LE(diff, 0.02 * coarse.cwiseAbs().maxCoeff());
        }
        coarse = up;
    }
}

TEST(FemBounds, NonUnitLoadingRejected) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(64);
    EXPECT_THROW(fem_bounds(mesh, z, z, Vec2(2, 0), e1), ConfigError);
    EXPECT_THROW(fem_bounds(mesh, Eigen::VectorXd::Zero(3), z, e1, e1), ConfigError);
}
