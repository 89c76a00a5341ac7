#include "homog_app/check.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "homog/batch_eval.hpp"
#include "homog/bounds.hpp"
#include "homog/fem.hpp"
#include "homog/losses.hpp"
#include "homog/test_bases.hpp"
#include "homog/training.hpp"

namespace homog::app {

namespace {

const NetworkConfig kArchitectures[] = {{4, 4, 1}, {10, 10, 2}, {20, 20, 3}, {50, 50, 5}};

PeriodicNet random_net(const NetworkConfig& config, std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> p(param_count(config));
    for (double& x : p) x = u(rng);
    return PeriodicNet(config, std::move(p));
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

CheckOutcome reference_value() {
    const double g = obnosov_effective({1.0, 0.1});
    return {"exact reference 0.6476", std::abs(g - 0.6476) <= 5e-5, "obnosov_effective(1, 0.1) = " + fmt(g)};
}

CheckOutcome parameter_counts() {
    const std::size_t expected[] = {65, 391, 1801, 15601};
    std::string detail;
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
        const std::size_t n = param_count(kArchitectures[i]);
        ok = ok && n == expected[i];
        detail += (i ? " " : "") + std::to_string(n);
    }
    return {"parameter counts", ok, detail};
}

CheckOutcome spectral_cardinality() {
    bool ok = true;
    for (int m = 1; m <= 8; ++m) {
        for (int n = 1; n <= 8; ++n) {
            ok = ok && build_spectral(m, n).size() == static_cast<std::size_t>(2 * ((m + 1) * (n + 1) - 1));
        }
    }
    return {"spectral cardinality", ok,
            "M=N=5: " + std::to_string(build_spectral(5, 5).size()) + ", M=N=7: " +
                std::to_string(build_spectral(7, 7).size())};
}

CheckOutcome zero_field_bounds(int mesh_n) {
    const PhasePair phases{1.0, 0.1};
    const TriMesh mesh = build_mesh(mesh_n, MaterialField::piecewise(phases));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
    const BoundReport r = guaranteed_bounds(zero, zero, mesh, Vec2(1, 0), Vec2(1, 0));
    const VoigtReuss vr = voigt_reuss(phases);
    const bool ok = std::abs(r.upper_bound - vr.upper) <= 1e-12 && std::abs(r.lower_bound - vr.lower) <= 1e-12;
    return {"zero field gives Voigt/Reuss", ok, fmt(r.upper_bound) + " / " + fmt(r.lower_bound)};
}

CheckOutcome bound_ordering(const CheckOptions& opt, std::mt19937_64& rng) {
    const PhasePair phases{1.0, 0.1};
    const double reference = obnosov_effective(phases);
    const TriMesh mesh = build_mesh(opt.mesh_n, MaterialField::piecewise(phases));
    double worst = -1.0;
    for (int a = 0; a < 2; ++a) {
        for (int t = 0; t < opt.trials; ++t) {
            const PeriodicNet primal = random_net(kArchitectures[a], rng, 1.0);
            const PeriodicNet dual = random_net(kArchitectures[a], rng, 1.0);
            const BoundReport r =
                guaranteed_bounds(project_to_p1(primal, mesh), project_to_p1(dual, mesh), mesh, Vec2(1, 0), Vec2(1, 0));
            worst = std::max({worst, reference - r.upper_bound, r.lower_bound - reference});
        }
    }
    return {"guaranteed bounds bracket the reference", worst <= 1e-12, "largest violation " + fmt(worst)};
}

CheckOutcome periodicity(const CheckOptions& opt, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(0.0, UnitCell::side_length);
    double worst = 0.0;
    for (int t = 0; t < opt.trials; ++t) {
        const PeriodicNet net = random_net(kArchitectures[1], rng, 1.0);
        const Vec2 x(coord(rng), coord(rng));
        const double v = net.value(x);
        for (const Vec2& shift : {Vec2(UnitCell::side_length, 0.0), Vec2(0.0, UnitCell::side_length)}) {
            worst = std::max(worst, std::abs(net.value(x + shift) - v));
        }
    }
    return {"network periodicity", worst <= 1e-12, "largest jump " + fmt(worst)};
}

CheckOutcome loss_gradient(const CheckOptions& opt, std::mt19937_64& rng) {
    const MaterialField material = MaterialField::smoothed({1.0, 0.1}, 0.1);
    const CollocationGrid grid(16);
    double worst = 0.0;
    for (Formulation form : {Formulation::primal, Formulation::dual}) {
        const StrongLoss loss(form, material, Vec2(1, 0), grid);
        PeriodicNet net = random_net(kArchitectures[0], rng, 0.5);
        BatchEvaluator eval(grid.points(), loss.order());
        Eigen::MatrixXd seed;
        loss.evaluate(eval.forward(net), &seed);
        const std::vector<double> grad = eval.backward(net, seed);
        std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
        for (int t = 0; t < std::max(1, opt.trials / 2); ++t) {
            const std::size_t k = pick(rng);
            const double h = 1e-6;
            const double saved = net.params()[k];
            net.params()[k] = saved + h;
            const double up = loss.evaluate(eval.forward(net), nullptr);
            net.params()[k] = saved - h;
            const double down = loss.evaluate(eval.forward(net), nullptr);
            net.params()[k] = saved;
            const double fd = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1e-6, std::abs(fd)));
        }
    }
    return {"strong loss gradient matches finite differences", worst <= 1e-4, "largest relative error " + fmt(worst)};
}

CheckOutcome homogeneous_fem() {
    const double gamma = 2.5;
    const TriMesh mesh = build_mesh(8, MaterialField::piecewise({gamma, gamma}));
    const SolveResult u = solve(assemble_primal(mesh, Vec2(1, 0)));
    const SolveResult w = solve(assemble_dual(mesh, Vec2(1, 0)));
    const BoundReport r = fem_bounds(mesh, u.solution, w.solution, Vec2(1, 0), Vec2(1, 0));
    const bool ok = std::abs(r.upper_bound - gamma) <= 1e-12 && std::abs(r.lower_bound - gamma) <= 1e-12;
    return {"homogeneous FEM bounds are exact", ok, fmt(r.upper_bound) + " / " + fmt(r.lower_bound)};
}

CheckOutcome adam_zero_gradient(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> params(20);
    for (double& p : params) p = g(rng);
    const std::vector<double> before = params;
    const std::vector<double> zeros(params.size(), 0.0);
    AdamState state(params.size());
    TrainConfig config;
    for (int i = 0; i < 10; ++i) adam_step(params, zeros, state, config);
    return {"Adam leaves parameters unchanged for a zero gradient", params == before, ""};
}

}  // namespace

std::vector<CheckOutcome> run_property_checks(const CheckOptions& options, std::ostream& log) {
    std::mt19937_64 rng(options.seed);
    std::vector<std::function<CheckOutcome()>> checks = {
        [] { return reference_value(); },
        [] { return parameter_counts(); },
        [] { return spectral_cardinality(); },
        [&] { return zero_field_bounds(options.mesh_n); },
        [&] { return bound_ordering(options, rng); },
        [&] { return periodicity(options, rng); },
        [&] { return loss_gradient(options, rng); },
        [] { return homogeneous_fem(); },
        [&] { return adam_zero_gradient(rng); },
    };
    std::vector<CheckOutcome> out;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        CheckOutcome c;
        try {
            c = checks[i]();
        } catch (const std::exception& e) {
            c.name = "property " + std::to_string(i + 1);
            c.pass = false;
            c.detail = std::string("threw: ") + e.what();
        }
        log << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) log << " (" << c.detail << ")";
        log << "\n";
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace homog::app
