#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cstddef>
#include <vector>

#include "homog/cell_material.hpp"
#include "homog/error.hpp"
#include "homog/parallel.hpp"

namespace homog {

struct MeshTriangle {
    std::array<int, 3> dofs;
    std::array<Vec2, 3> basis_gradients;  ///< constant gradients of the three hat functions
    Mat2 conductivity;
    Mat2 resistivity;
};

/// Structured periodic P1 mesh of the unit cell. Every square of the n x n
/// grid is split along its lower-left to upper-right diagonal into
///   lower triangle (i,j), (i+1,j), (i+1,j+1) and
///   upper triangle (i,j), (i+1,j+1), (i,j+1).
/// Node (i, j) maps to DoF (i mod n) + n (j mod n), the same numbering as
/// CollocationGrid with the same n. Triangle 2 (i + n j) is the lower and
/// 2 (i + n j) + 1 the upper triangle of square (i, j).
class TriMesh {
public:
    int n() const { return n_; }
    double spacing() const { return UnitCell::side_length / n_; }
    double triangle_area() const { return 0.5 * spacing() * spacing(); }
    std::size_t dof_count() const { return static_cast<std::size_t>(n_) * n_; }
    int dof(int i, int j) const;
    Vec2 node_position(int dof) const;
    MaterialKind material_kind() const { return material_kind_; }
    const std::vector<MeshTriangle>& triangles() const { return triangles_; }

    /// Gradient of the P1 interpolant of `values` on triangle t.
    Vec2 gradient(const Eigen::VectorXd& values, std::size_t t) const;

private:
    friend TriMesh build_mesh(int n, const MaterialField& material);
    int n_ = 0;
    MaterialKind material_kind_ = MaterialKind::piecewise;
    std::vector<MeshTriangle> triangles_;
};

/// Builds the mesh and samples the material at each triangle centroid.
/// Throws ConfigError unless n >= 4 and n % 4 == 0, which puts the
/// inclusion edges at pi/2 = (n/4) h on mesh lines.
TriMesh build_mesh(int n, const MaterialField& material);

/// K u = b over the periodic DoFs, plus the constant term of the energy
///   E(u) = sum_T |T| (l + G g_T)^T M_T (l + G g_T) = c - 2 b^T u + u^T K u.
struct SparseSystem {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd rhs;
    double energy_constant = 0.0;
};

/// Primal cell problem, M_T = A_T, G = I, l = xi.
SparseSystem assemble_primal(const TriMesh& mesh, const Vec2& xi, const ParallelOptions& parallel = {});
/// Dual cell problem, M_T = A_T^{-1}, G = Q, l = zeta.
SparseSystem assemble_dual(const TriMesh& mesh, const Vec2& zeta, const ParallelOptions& parallel = {});

struct SolveOptions {
    double tolerance = 1e-10;   ///< on ||b - K u|| / ||b||
    int max_iterations = 0;     ///< 0 selects 10 * DoF count
    int pinned_dof = 0;
};

struct SolveResult {
    Eigen::VectorXd solution;  ///< zero-mean
    int iterations = 0;
    std::vector<double> residual_history;  ///< relative residual per iteration
};

/// Thrown when CG hits the iteration cap; carries the residual history.
class SolverError : public NumericalError {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : NumericalError(what), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

/// Jacobi-preconditioned CG with one DoF pinned to zero, followed by a shift
/// to zero mean.
SolveResult solve(const SparseSystem& system, const SolveOptions& options = {});

/// Energy per unit cell area of a P1 field, (1/|X|) E(u), evaluated by exact
/// per-triangle integration.
double primal_energy(const TriMesh& mesh, const Eigen::VectorXd& u, const Vec2& xi);
double dual_energy(const TriMesh& mesh, const Eigen::VectorXd& w, const Vec2& zeta);

}  // namespace homog
