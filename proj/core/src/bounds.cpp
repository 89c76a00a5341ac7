#include "homog/bounds.hpp"

#include <cmath>
#include <string>

#include "homog/error.hpp"

namespace homog {

namespace {

void require_unit(const Vec2& v, const char* name) {
    if (std::abs(v.norm() - 1.0) > 1e-12) {
        throw ConfigError(std::string(name) + " must be a unit vector for scalar bounds");
    }
}

void require_rows(const Eigen::MatrixXd& outputs, const MaterialSamples& material) {
    if (static_cast<std::size_t>(outputs.rows()) != material.size() || outputs.cols() < 3) {
        throw ConfigError("network outputs do not match the sampled material (" + std::to_string(outputs.rows()) +
                          " rows vs " + std::to_string(material.size()) + " points)");
    }
}

}  // namespace

double relative_gap(double primal, double dual) { return (primal - dual) / primal; }

double quick_estimate_primal(const Eigen::MatrixXd& outputs, const MaterialSamples& m, const Vec2& xi) {
    require_rows(outputs, m);
    const Eigen::ArrayXd e1 = xi[0] + outputs.col(1).array();
    const Eigen::ArrayXd e2 = xi[1] + outputs.col(2).array();
    return (m.a11 * e1 * e1 + 2.0 * m.a12 * e1 * e2 + m.a22 * e2 * e2).mean();
}

double quick_estimate_dual(const Eigen::MatrixXd& outputs, const MaterialSamples& m, const Vec2& zeta) {
    require_rows(outputs, m);
    const Eigen::ArrayXd e1 = zeta[0] - outputs.col(2).array();
    const Eigen::ArrayXd e2 = zeta[1] + outputs.col(1).array();
    return 1.0 / (m.r11 * e1 * e1 + 2.0 * m.r12 * e1 * e2 + m.r22 * e2 * e2).mean();
}

double quick_estimate_primal(const PeriodicNet& net, const MaterialField& material, const Vec2& xi,
                             const CollocationGrid& grid) {
    BatchEvaluator eval(grid.points(), DerivOrder::gradient);
    return quick_estimate_primal(eval.forward(net), MaterialSamples::sample(material, grid.points()), xi);
}

double quick_estimate_dual(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta,
                           const CollocationGrid& grid) {
    BatchEvaluator eval(grid.points(), DerivOrder::gradient);
    return quick_estimate_dual(eval.forward(net), MaterialSamples::sample(material, grid.points()), zeta);
}

Eigen::VectorXd project_to_p1(const PeriodicNet& net, const TriMesh& mesh, ParallelOptions parallel) {
    std::vector<Vec2> nodes(mesh.dof_count());
    for (std::size_t d = 0; d < nodes.size(); ++d) nodes[d] = mesh.node_position(static_cast<int>(d));
    BatchEvaluator eval(nodes, DerivOrder::value, parallel);
    return eval.forward(net).col(0);
}

Eigen::VectorXd project_to_p1(const Eigen::VectorXd& grid_values, const CollocationGrid& grid, const TriMesh& mesh) {
    if (grid.n() != mesh.n()) {
        throw ConfigError("collocation grid n = " + std::to_string(grid.n()) + " does not match mesh n = " +
                          std::to_string(mesh.n()) + "; P1 projection needs coinciding nodes");
    }
    if (static_cast<std::size_t>(grid_values.size()) != grid.size()) {
        throw ConfigError("grid values have the wrong length");
    }
    return grid_values;
}

BoundReport fem_bounds(const TriMesh& mesh, const Eigen::VectorXd& primal_solution,
                       const Eigen::VectorXd& dual_solution, const Vec2& xi, const Vec2& zeta) {
    require_unit(xi, "xi");
    require_unit(zeta, "zeta");
    BoundReport r;
    r.upper_bound = primal_energy(mesh, primal_solution, xi);
    r.lower_bound = 1.0 / dual_energy(mesh, dual_solution, zeta);
    r.primal_estimate = r.upper_bound;
    r.dual_estimate = r.lower_bound;
    r.gap = relative_gap(r.primal_estimate, r.dual_estimate);
    return r;
}

BoundReport guaranteed_bounds(const Eigen::VectorXd& primal_dofs, const Eigen::VectorXd& dual_dofs,
                              const TriMesh& mesh, const Vec2& xi, const Vec2& zeta) {
    if (mesh.material_kind() != MaterialKind::piecewise) {
        throw ConfigError("guaranteed bounds refer to the original problem; build the mesh on the piecewise material");
    }
    return fem_bounds(mesh, primal_dofs, dual_dofs, xi, zeta);
}

}  // namespace homog
