#pragma once

#include <Eigen/Core>

#include "homog/batch_eval.hpp"
#include "homog/cell_material.hpp"
#include "homog/fem.hpp"
#include "homog/losses.hpp"
#include "homog/network.hpp"
#include "homog/quadrature.hpp"

namespace homog {

/// Scalar summary of one primal/dual pair for a unit loading direction.
/// The dual side is reported as the reciprocal of the dual energy, so all
/// four numbers are conductivities.
struct BoundReport {
    double primal_estimate = 0.0;
    double dual_estimate = 0.0;
    double upper_bound = 0.0;
    double lower_bound = 0.0;
    /// (primal_estimate - dual_estimate) / primal_estimate
    double gap = 0.0;
};

double relative_gap(double primal, double dual);

/// Quadrature energy (1/|X|) integral (xi + grad u)^T A (xi + grad u) from
/// network outputs on the grid (at least value and gradient columns).
double quick_estimate_primal(const Eigen::MatrixXd& outputs, const MaterialSamples& material, const Vec2& xi);
/// 1 / [(1/|X|) integral (zeta + Q grad w)^T A^{-1} (zeta + Q grad w)].
double quick_estimate_dual(const Eigen::MatrixXd& outputs, const MaterialSamples& material, const Vec2& zeta);

double quick_estimate_primal(const PeriodicNet& net, const MaterialField& material, const Vec2& xi,
                             const CollocationGrid& grid);
double quick_estimate_dual(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta,
                           const CollocationGrid& grid);

/// Nodal values of the network on the mesh, i.e. its P1 interpolant.
Eigen::VectorXd project_to_p1(const PeriodicNet& net, const TriMesh& mesh, ParallelOptions parallel = {});
/// Reuses values already computed on a grid. Throws ConfigError unless the
/// grid nodes coincide with the mesh nodes.
Eigen::VectorXd project_to_p1(const Eigen::VectorXd& grid_values, const CollocationGrid& grid, const TriMesh& mesh);

/// Exact per-triangle energies of the two P1 fields. The mesh must carry the
/// piecewise material (ConfigError otherwise) and both loadings must be
/// unit vectors. Quick estimates in the result are set to the bounds.
BoundReport guaranteed_bounds(const Eigen::VectorXd& primal_dofs, const Eigen::VectorXd& dual_dofs,
                              const TriMesh& mesh, const Vec2& xi, const Vec2& zeta);

/// Same formula on finite-element solutions; any material kind.
BoundReport fem_bounds(const TriMesh& mesh, const Eigen::VectorXd& primal_solution,
                       const Eigen::VectorXd& dual_solution, const Vec2& xi, const Vec2& zeta);

}  // namespace homog
