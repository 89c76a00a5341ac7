#include "homog/fem.hpp"

#include <Eigen/SparseCore>
#include <cmath>
#include <string>

#include "homog/losses.hpp"

namespace homog {

namespace {

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

int TriMesh::dof(int i, int j) const { return wrap_index(i, n_) + n_ * wrap_index(j, n_); }

Vec2 TriMesh::node_position(int dof) const {
    const double h = spacing();
    return {h * (dof % n_), h * (dof / n_)};
}

Vec2 TriMesh::gradient(const Eigen::VectorXd& values, std::size_t t) const {
    const MeshTriangle& tri = triangles_[t];
    // the hat gradients sum to zero, so differences against the first node
    // give the same gradient without cancellation
    const double v0 = values[tri.dofs[0]];
    return (values[tri.dofs[1]] - v0) * tri.basis_gradients[1] + (values[tri.dofs[2]] - v0) * tri.basis_gradients[2];
}

TriMesh build_mesh(int n, const MaterialField& material) {
    if (n < 4 || n % 4 != 0) {
        throw ConfigError("mesh size n = " + std::to_string(n) +
                          " must be a positive multiple of 4 so the inclusion edges lie on mesh lines");
    }
    TriMesh mesh;
    mesh.n_ = n;
    mesh.material_kind_ = material.kind();
    const double h = mesh.spacing();
    const double inv_h = 1.0 / h;
    mesh.triangles_.reserve(2 * mesh.dof_count());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int d00 = mesh.dof(i, j), d10 = mesh.dof(i + 1, j);
            const int d11 = mesh.dof(i + 1, j + 1), d01 = mesh.dof(i, j + 1);
            const double x0 = h * i, y0 = h * j;

            MeshTriangle lower;
            lower.dofs = {d00, d10, d11};
            lower.basis_gradients = {Vec2(-inv_h, 0.0), Vec2(inv_h, -inv_h), Vec2(0.0, inv_h)};
            const Vec2 c_lower(x0 + 2.0 * h / 3.0, y0 + h / 3.0);
            lower.conductivity = material.conductivity(c_lower);
            lower.resistivity = material.resistivity(c_lower);

            MeshTriangle upper;
            upper.dofs = {d00, d11, d01};
            upper.basis_gradients = {Vec2(0.0, -inv_h), Vec2(inv_h, 0.0), Vec2(-inv_h, inv_h)};
            const Vec2 c_upper(x0 + h / 3.0, y0 + 2.0 * h / 3.0);
            upper.conductivity = material.conductivity(c_upper);
            upper.resistivity = material.resistivity(c_upper);

            mesh.triangles_.push_back(lower);
            mesh.triangles_.push_back(upper);
        }
    }
    return mesh;
}

namespace {

SparseSystem assemble(const TriMesh& mesh, const Vec2& loading, bool dual, const ParallelOptions& parallel) {
    const Mat2 q = rotation_q();
    const auto& tris = mesh.triangles();
    const double area = mesh.triangle_area();
    const std::size_t n_dof = mesh.dof_count();

    // Triangles are split into fixed blocks; each block fills its own triplet
    // list and rhs, merged afterwards in block order.
    constexpr std::size_t block = 4096;
    const std::size_t n_blocks = (tris.size() + block - 1) / block;
    std::vector<std::vector<Eigen::Triplet<double>>> triplets(n_blocks);
    std::vector<Eigen::VectorXd> rhs(n_blocks);
    std::vector<double> constant(n_blocks, 0.0);

    parallel_for(n_blocks, parallel.threads, [&](std::size_t b) {
        auto& trip = triplets[b];
        Eigen::VectorXd& r = rhs[b];
        r.setZero(static_cast<Eigen::Index>(n_dof));
        const std::size_t end = std::min(tris.size(), (b + 1) * block);
        trip.reserve(9 * (end - b * block));
        for (std::size_t t = b * block; t < end; ++t) {
            const MeshTriangle& tri = tris[t];
            const Mat2 m = dual ? Mat2(q.transpose() * tri.resistivity * q) : tri.conductivity;
            const Mat2& tensor = dual ? tri.resistivity : tri.conductivity;
            // linear term: sum_T |T| l^T M_T G grad(phi_k)
            const Vec2 lin = dual ? Vec2(q.transpose() * tensor * loading) : Vec2(tensor * loading);
            constant[b] += area * loading.dot(tensor * loading);
            for (int a = 0; a < 3; ++a) {
                const Vec2& ga = tri.basis_gradients[a];
                r[tri.dofs[a]] -= area * lin.dot(ga);
                for (int c = 0; c < 3; ++c) {
                    trip.emplace_back(tri.dofs[a], tri.dofs[c], area * ga.dot(m * tri.basis_gradients[c]));
                }
            }
        }
    });

    SparseSystem sys;
    std::vector<Eigen::Triplet<double>> all;
    all.reserve(9 * tris.size());
    sys.rhs.setZero(static_cast<Eigen::Index>(n_dof));
    for (std::size_t b = 0; b < n_blocks; ++b) {
        all.insert(all.end(), triplets[b].begin(), triplets[b].end());
        sys.rhs += rhs[b];
        sys.energy_constant += constant[b];
    }
    sys.stiffness.resize(static_cast<Eigen::Index>(n_dof), static_cast<Eigen::Index>(n_dof));
    sys.stiffness.setFromTriplets(all.begin(), all.end());
    sys.stiffness.makeCompressed();
    return sys;
}

}  // namespace

SparseSystem assemble_primal(const TriMesh& mesh, const Vec2& xi, const ParallelOptions& parallel) {
    return assemble(mesh, xi, false, parallel);
}

SparseSystem assemble_dual(const TriMesh& mesh, const Vec2& zeta, const ParallelOptions& parallel) {
    return assemble(mesh, zeta, true, parallel);
}

SolveResult solve(const SparseSystem& system, const SolveOptions& options) {
    const Eigen::Index n = system.stiffness.rows();
    if (system.stiffness.cols() != n || system.rhs.size() != n) {
        throw ConfigError("stiffness and right-hand side sizes do not match");
    }
    if (options.pinned_dof < 0 || options.pinned_dof >= n) {
        throw ConfigError("pinned DoF " + std::to_string(options.pinned_dof) + " out of range");
    }
    const int pin = options.pinned_dof;
    const int max_iter = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);

    // The pinned row and column are removed by masking, which keeps the
    // operator SPD on the complement.
    Eigen::VectorXd b = system.rhs;
    b[pin] = 0.0;
    Eigen::VectorXd inv_diag = system.stiffness.diagonal().cwiseInverse();
    inv_diag[pin] = 0.0;
    auto apply = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd masked = v;
        masked[pin] = 0.0;
        Eigen::VectorXd out = system.stiffness * masked;
        out[pin] = 0.0;
        return out;
    };

    SolveResult result;
    result.solution.setZero(n);
    const double b_norm = b.norm();
    if (b_norm == 0.0) return result;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        const Eigen::VectorXd kp = apply(p);
        const double alpha = rz / p.dot(kp);
        x += alpha * p;
        r -= alpha * kp;
        const double rel = r.norm() / b_norm;
        result.residual_history.push_back(rel);
        result.iterations = it;
        if (!std::isfinite(rel)) break;
        if (rel <= options.tolerance) {
            // confirm on the true residual, not the recurrence
            const double true_rel = (b - apply(x)).norm() / b_norm;
            if (true_rel <= options.tolerance) {
                converged = true;
                break;
            }
            r = b - apply(x);
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    if (!converged) {
        const double last = result.residual_history.empty() ? 1.0 : result.residual_history.back();
        throw SolverError("conjugate gradient did not reach relative residual " + std::to_string(options.tolerance) +
                              " in " + std::to_string(result.iterations) + " iterations (last " +
                              std::to_string(last) + ")",
                          result.residual_history);
    }
    x.array() -= x.mean();
    result.solution = std::move(x);
    return result;
}

namespace {

void check_size(const TriMesh& mesh, const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != mesh.dof_count()) {
        throw ConfigError("field has " + std::to_string(v.size()) + " values, mesh has " +
                          std::to_string(mesh.dof_count()) + " DoFs");
    }
}

}  // namespace

double primal_energy(const TriMesh& mesh, const Eigen::VectorXd& u, const Vec2& xi) {
    check_size(mesh, u);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
        const Vec2 e = xi + mesh.gradient(u, t);
        sum += e.dot(mesh.triangles()[t].conductivity * e);
    }
    return sum * mesh.triangle_area() / UnitCell::area;
}

double dual_energy(const TriMesh& mesh, const Eigen::VectorXd& w, const Vec2& zeta) {
    check_size(mesh, w);
    const Mat2 q = rotation_q();
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
        const Vec2 e = zeta + q * mesh.gradient(w, t);
        sum += e.dot(mesh.triangles()[t].resistivity * e);
    }
    return sum * mesh.triangle_area() / UnitCell::area;
}

}  // namespace homog
