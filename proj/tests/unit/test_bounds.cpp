#include <gtest/gtest.h>

#include "generators.hpp"
#include "homog/bounds.hpp"

using namespace homog;
using homog::testkit::Gen;

namespace {
const Vec2 e1(1.0, 0.0);
}

TEST(QuickEstimate, ZeroNetGivesAverages) {
    const CollocationGrid grid(32);
    const auto zero = PeriodicNet::zeros(testkit::kNet65);
    const auto c = MaterialField::piecewise({0.6, 0.6});
    EXPECT_NEAR(quick_estimate_primal(zero, c, e1, grid), 0.6, 1e-15);
    EXPECT_NEAR(quick_estimate_dual(zero, c, e1, grid), 0.6, 1e-15);
    // The interface nodes take the matrix phase, so the node fraction of the
    // inclusion is ((n/2 - 1)/n)^2 rather than 1/4.
    const auto pw = MaterialField::piecewise({1.0, 0.1});
    const CollocationGrid fine(128);
    const double f = std::pow(63.0 / 128.0, 2);
    EXPECT_NEAR(quick_estimate_primal(zero, pw, e1, fine), voigt_reuss({1.0, 0.1}, f).upper, 1e-14);
    EXPECT_NEAR(quick_estimate_dual(zero, pw, e1, fine), voigt_reuss({1.0, 0.1}, f).lower, 1e-14);
    EXPECT_NEAR(quick_estimate_primal(zero, pw, e1, fine), 0.775, 0.01);
    EXPECT_NEAR(quick_estimate_dual(zero, pw, e1, fine), 1.0 / 3.25, 0.01);
}

TEST(QuickEstimate, ConstantShiftInvariance) {
    Gen g(1);
    const CollocationGrid grid(32);
    const auto m = MaterialField::smoothed({1.0, 0.1}, 0.05);
    const auto net = g.net(testkit::kNet65);
    std::vector<double> p(net.params().begin(), net.params().end());
    p.back() += 3.7;  // output bias
    const PeriodicNet shifted(net.config(), p);
    EXPECT_EQ(quick_estimate_primal(net, m, e1, grid), quick_estimate_primal(shifted, m, e1, grid));
    EXPECT_EQ(quick_estimate_dual(net, m, e1, grid), quick_estimate_dual(shifted, m, e1, grid));
}

TEST(Projection, ConstantNetGivesConstantDofs) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    std::vector<double> p(param_count(testkit::kNet65), 0.0);
    p.back() = 2.5;
    const Eigen::VectorXd d = project_to_p1(PeriodicNet(testkit::kNet65, p), mesh);
    EXPECT_EQ(d, Eigen::VectorXd::Constant(64, 2.5));
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) EXPECT_EQ(mesh.gradient(d, t), Vec2::Zero());
}

TEST(Projection, InterpolatesAtNodes) {
    Gen g(2);
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    const auto net = g.net(testkit::kNet391);
    const Eigen::VectorXd d = project_to_p1(net, mesh);
    for (int k = 0; k < 64; ++k) EXPECT_NEAR(d[k], net.value(mesh.node_position(k)), 1e-13);
    // idempotence: the P1 field is its own interpolant
    const CollocationGrid grid(8);
    EXPECT_EQ(project_to_p1(d, grid, mesh), d);
}

TEST(Projection, GradientIsNodalDifference) {
    Gen g(3);
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    const auto net = g.net(testkit::kNet65);
    const Eigen::VectorXd d = project_to_p1(net, mesh);
    const double h = mesh.spacing();
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
            const Vec2 x(i * h, j * h);
            const double v00 = net.value(x), v10 = net.value(x + Vec2(h, 0)), v11 = net.value(x + Vec2(h, h));
            const Vec2 ga = mesh.gradient(d, 2 * static_cast<std::size_t>(i + 8 * j));
            EXPECT_NEAR(ga[0], (v10 - v00) / h, 1e-12);
            EXPECT_NEAR(ga[1], (v11 - v10) / h, 1e-12);
        }
    }
}

TEST(Projection, GridMismatchRejected) {
    const auto mesh = build_mesh(8, MaterialField::piecewise({1.0, 0.1}));
    EXPECT_THROW(project_to_p1(Eigen::VectorXd::Zero(256), CollocationGrid(16), mesh), ConfigError);
    EXPECT_THROW(project_to_p1(Eigen::VectorXd::Zero(10), CollocationGrid(8), mesh), ConfigError);
}

TEST(GuaranteedBounds, ZeroNetsGiveVoigtReuss) {
    const auto mesh = build_mesh(16, MaterialField::piecewise({1.0, 0.1}));
    const auto zero = PeriodicNet::zeros(testkit::kNet65);
    const auto r = guaranteed_bounds(project_to_p1(zero, mesh), project_to_p1(zero, mesh), mesh, e1, e1);
    EXPECT_NEAR(r.upper_bound, 0.775, 1e-14);
    EXPECT_NEAR(r.lower_bound, 1.0 / 3.25, 1e-14);
}

TEST(GuaranteedBounds, ReproducesFemBounds) {
    const auto mesh = build_mesh(32, MaterialField::piecewise({1.0, 0.1}));
    const auto up = solve(assemble_primal(mesh, e1)).solution;
    const auto lo = solve(assemble_dual(mesh, e1)).solution;
    const auto a = guaranteed_bounds(up, lo, mesh, e1, e1);
    const auto b = fem_bounds(mesh, up, lo, e1, e1);
    EXPECT_EQ(a.upper_bound, b.upper_bound);
    EXPECT_EQ(a.lower_bound, b.lower_bound);
}

TEST(GuaranteedBounds, RequirePiecewiseMesh) {
    const auto mesh = build_mesh(8, MaterialField::smoothed({1.0, 0.1}, 0.05));
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(64);
    EXPECT_THROW(guaranteed_bounds(z, z, mesh, e1, e1), ConfigError);
}

TEST(GuaranteedBoundsProperty, OrderingForRandomNets) {
    Gen g(4);
    const double exact = obnosov_effective({1.0, 0.1});
    const auto mesh = build_mesh(32, MaterialField::piecewise({1.0, 0.1}));
    for (const auto& cfg : {testkit::kNet65, testkit::kNet391}) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = g.net(cfg, g.log_uniform(0.01, 3.0));
            const auto d = g.net(cfg, g.log_uniform(0.01, 3.0));
            const auto r = guaranteed_bounds(project_to_p1(p, mesh), project_to_p1(d, mesh), mesh, e1, e1);
            EXPECT_LE(r.lower_bound, exact + 1e-12);
            EXPECT_GE(r.upper_bound, exact - 1e-12);
            EXPECT_LE(r.lower_bound, r.upper_bound);
        }
    }
}

TEST(GuaranteedBoundsProperty, ShiftInvariantGap) {
    Gen g(5);
    const auto mesh = build_mesh(16, MaterialField::piecewise({1.0, 0.1}));
    const auto net = g.net(testkit::kNet65);
    const Eigen::VectorXd d = project_to_p1(net, mesh);
    const Eigen::VectorXd shifted = d.array() + 4.0;
    const auto a = guaranteed_bounds(d, d, mesh, e1, e1);
    const auto b = guaranteed_bounds(shifted, d, mesh, e1, e1);
    EXPECT_NEAR(a.gap, b.gap, 1e-13);
}

TEST(QuickEstimateProperty, ConvergesToExactEnergyOfSmoothFields) {
    // Same P1 field, two integrators: quadrature on its nodal gradients
    // approaches the exact per-triangle energy as the grid refines. The
    // net gives a smooth field; its quadrature energy on the smoothed
    // material and the P1 energy on a fine mesh must agree as n grows.
    Gen g(6);
    const auto net = g.net(testkit::kNet65, 0.5);
    const auto m = MaterialField::smoothed({1.0, 0.1}, 0.2);
    double prev = 1e9;
    for (int n : {32, 64, 128, 256}) {
        const auto mesh = build_mesh(n, m);
        const double exact_p1 = primal_energy(mesh, project_to_p1(net, mesh), e1);
        const double quad = quick_estimate_primal(net, m, e1, CollocationGrid(n));
        const double diff = std::abs(quad - exact_p1);
        EXPECT_LE(diff, prev);
        prev = diff;
    }
    EXPECT_LE(prev, 1e-2);
}
