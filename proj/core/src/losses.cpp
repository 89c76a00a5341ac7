#include "homog/losses.hpp"

#include <string>

#include "homog/error.hpp"

namespace homog {

namespace {

void require_smoothed(const MaterialField& material) {
    if (material.kind() != MaterialKind::smoothed) {
        throw ConfigError(
            "strong-form losses need a differentiable material; the piecewise field makes div(A xi) vanish at every "
            "collocation point. Use a smoothed material or a weak-form loss");
    }
}

void require_shape(const Eigen::MatrixXd& outputs, std::size_t points, int min_components) {
    if (outputs.rows() != static_cast<Eigen::Index>(points) || outputs.cols() < min_components) {
        throw ConfigError("network outputs have shape " + std::to_string(outputs.rows()) + "x" +
                          std::to_string(outputs.cols()) + ", expected " + std::to_string(points) + " rows and >= " +
                          std::to_string(min_components) + " components");
    }
}

}  // namespace

MaterialSamples MaterialSamples::sample(const MaterialField& material, std::span<const Vec2> points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    MaterialSamples s;
    for (auto* a : {&s.a11, &s.a12, &s.a22, &s.r11, &s.r12, &s.r22, &s.gamma}) a->resize(n);
    s.has_gradient = material.kind() == MaterialKind::smoothed;
    if (s.has_gradient) {
        s.dgamma1.resize(n);
        s.dgamma2.resize(n);
    }
    for (Eigen::Index p = 0; p < n; ++p) {
        const Vec2& x = points[static_cast<std::size_t>(p)];
        const Mat2 a = material.conductivity(x);
        const Mat2 r = material.resistivity(x);
        s.a11[p] = a(0, 0), s.a12[p] = a(0, 1), s.a22[p] = a(1, 1);
        s.r11[p] = r(0, 0), s.r12[p] = r(0, 1), s.r22[p] = r(1, 1);
        s.gamma[p] = material.gamma(x);
        if (s.has_gradient) {
            const Vec2 g = material.conductivity_gradient(x);
            s.dgamma1[p] = g[0];
            s.dgamma2[p] = g[1];
        }
    }
    return s;
}

double strong_primal_residual(const Jet2& u, double gamma, const Vec2& grad_gamma, const Vec2& xi) {
    return grad_gamma[0] * (xi[0] + u.grad(0)) + grad_gamma[1] * (xi[1] + u.grad(1)) + gamma * u.laplacian();
}

double strong_dual_residual(const Jet2& w, double gamma, const Vec2& grad_gamma, const Vec2& zeta) {
    const double rho = 1.0 / gamma;
    const double drho1 = -grad_gamma[0] * rho * rho;
    const double drho2 = -grad_gamma[1] * rho * rho;
    // f1 = rho (zeta1 - w_2), f2 = rho (zeta2 + w_1)
    return drho1 * (zeta[1] + w.grad(0)) - drho2 * (zeta[0] - w.grad(1)) + rho * w.laplacian();
}

double strong_primal_residual(const PeriodicNet& net, const MaterialField& material, const Vec2& xi, const Vec2& x) {
    require_smoothed(material);
    return strong_primal_residual(net.forward(x), material.gamma(x), material.conductivity_gradient(x), xi);
}

double strong_dual_residual(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta, const Vec2& x) {
    require_smoothed(material);
    return strong_dual_residual(net.forward(x), material.gamma(x), material.conductivity_gradient(x), zeta);
}

namespace {

double strong_loss(Formulation form, const PeriodicNet& net, const MaterialField& material, const Vec2& loading,
                   const CollocationGrid& grid) {
    const StrongLoss loss(form, material, loading, grid);
    BatchEvaluator eval(grid.points(), DerivOrder::hessian);
    return loss.evaluate(eval.forward(net), nullptr);
}

Eigen::VectorXd weak_residual(Formulation form, const PeriodicNet& net, const MaterialField& material,
                              const Vec2& loading, const BasisGradients& basis, const CollocationGrid& grid) {
    if (basis.point_count() != grid.size()) {
        throw ConfigError("basis gradients were sampled on " + std::to_string(basis.point_count()) +
                          " points, grid has " + std::to_string(grid.size()));
    }
    auto shared = std::make_shared<const BasisGradients>(basis);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(basis.size()));
    const WeakLoss loss(form, material, loading, grid, shared, Gram::diagonal(ones));
    BatchEvaluator eval(grid.points(), DerivOrder::gradient);
    return loss.residual_vector(eval.forward(net));
}

}  // namespace

double strong_primal_loss(const PeriodicNet& net, const MaterialField& material, const Vec2& xi,
                          const CollocationGrid& grid) {
    return strong_loss(Formulation::primal, net, material, xi, grid);
}

double strong_dual_loss(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta,
                        const CollocationGrid& grid) {
    return strong_loss(Formulation::dual, net, material, zeta, grid);
}

Eigen::VectorXd weak_residual_primal(const PeriodicNet& net, const MaterialField& material, const Vec2& xi,
                                     const BasisGradients& basis, const CollocationGrid& grid) {
    return weak_residual(Formulation::primal, net, material, xi, basis, grid);
}

Eigen::VectorXd weak_residual_dual(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta,
                                   const BasisGradients& basis, const CollocationGrid& grid) {
    return weak_residual(Formulation::dual, net, material, zeta, basis, grid);
}

double gram_weighted_loss(const Eigen::VectorXd& r, const Gram& gram) { return r.dot(gram.solve(r)); }

StrongLoss::StrongLoss(Formulation form, const MaterialField& material, const Vec2& loading,
                       const CollocationGrid& grid)
    : form_(form), loading_(loading) {
    require_smoothed(material);
    mat_ = MaterialSamples::sample(material, grid.points());
}

Eigen::VectorXd StrongLoss::residuals(const Eigen::MatrixXd& outputs) const {
    require_shape(outputs, mat_.size(), 6);
    const auto g1 = outputs.col(1).array();
    const auto g2 = outputs.col(2).array();
    const auto lap = outputs.col(3).array() + outputs.col(5).array();
    if (form_ == Formulation::primal) {
        return (mat_.dgamma1 * (loading_[0] + g1) + mat_.dgamma2 * (loading_[1] + g2) + mat_.gamma * lap).matrix();
    }
    const Eigen::ArrayXd rho = mat_.gamma.inverse();
    const Eigen::ArrayXd drho1 = -mat_.dgamma1 * rho * rho;
    const Eigen::ArrayXd drho2 = -mat_.dgamma2 * rho * rho;
    return (drho1 * (loading_[1] + g1) - drho2 * (loading_[0] - g2) + rho * lap).matrix();
}

double StrongLoss::evaluate(const Eigen::MatrixXd& outputs, Eigen::MatrixXd* seed) const {
    const Eigen::VectorXd r = residuals(outputs);
    const double n = static_cast<double>(r.size());
    const double loss = r.squaredNorm() / n;
    if (seed != nullptr) {
        seed->setZero(outputs.rows(), outputs.cols());
        const Eigen::ArrayXd s = (2.0 / n) * r.array();
        if (form_ == Formulation::primal) {
            seed->col(1) = (s * mat_.dgamma1).matrix();
            seed->col(2) = (s * mat_.dgamma2).matrix();
            seed->col(3) = (s * mat_.gamma).matrix();
        } else {
            const Eigen::ArrayXd rho = mat_.gamma.inverse();
            seed->col(1) = (-s * mat_.dgamma1 * rho * rho).matrix();
            seed->col(2) = (-s * mat_.dgamma2 * rho * rho).matrix();
            seed->col(3) = (s * rho).matrix();
        }
        seed->col(5) = seed->col(3);
    }
    return loss;
}

WeakLoss::WeakLoss(Formulation form, const MaterialField& material, const Vec2& loading, const CollocationGrid& grid,
                   std::shared_ptr<const BasisGradients> basis, Gram gram)
    : form_(form),
      loading_(loading),
      mat_(MaterialSamples::sample(material, grid.points())),
      basis_(std::move(basis)),
      gram_(std::move(gram)),
      weight_(UnitCell::area / static_cast<double>(grid.size())) {
    if (!basis_ || basis_->point_count() != grid.size()) {
        throw ConfigError("basis/grid mismatch: test gradients must be sampled on the training grid");
    }
    if (gram_.size() != basis_->size()) {
        throw ConfigError("Gram size " + std::to_string(gram_.size()) + " does not match basis size " +
                          std::to_string(basis_->size()));
    }
}

void WeakLoss::fluxes(const Eigen::MatrixXd& outputs, Eigen::VectorXd& f1, Eigen::VectorXd& f2) const {
    require_shape(outputs, mat_.size(), 3);
    const auto g1 = outputs.col(1).array();
    const auto g2 = outputs.col(2).array();
    if (form_ == Formulation::primal) {
        const Eigen::ArrayXd e1 = loading_[0] + g1;
        const Eigen::ArrayXd e2 = loading_[1] + g2;
        f1 = (mat_.a11 * e1 + mat_.a12 * e2).matrix();
        f2 = (mat_.a12 * e1 + mat_.a22 * e2).matrix();
        return;
    }
    // e = zeta + Q grad w = (zeta1 - w_2, zeta2 + w_1); flux = Q^T R e = ((Re)_2, -(Re)_1)
    const Eigen::ArrayXd e1 = loading_[0] - g2;
    const Eigen::ArrayXd e2 = loading_[1] + g1;
    f1 = (mat_.r12 * e1 + mat_.r22 * e2).matrix();
    f2 = (-(mat_.r11 * e1 + mat_.r12 * e2)).matrix();
}

Eigen::VectorXd WeakLoss::residual_vector(const Eigen::MatrixXd& outputs) const {
    Eigen::VectorXd f1, f2;
    fluxes(outputs, f1, f2);
    Eigen::VectorXd r = basis_->d1 * f1;
    r.noalias() += basis_->d2 * f2;
    return weight_ * r;
}

double WeakLoss::evaluate(const Eigen::MatrixXd& outputs, Eigen::MatrixXd* seed) const {
    const Eigen::VectorXd r = residual_vector(outputs);
    const Eigen::VectorXd ginv_r = gram_.solve(r);
    const double loss = r.dot(ginv_r);
    if (seed != nullptr) {
        const Eigen::VectorXd s = 2.0 * ginv_r;
        // dL/d flux_i(p) = weight * t_i(p)
        const Eigen::ArrayXd t1 = weight_ * (basis_->d1.transpose() * s).array();
        const Eigen::ArrayXd t2 = weight_ * (basis_->d2.transpose() * s).array();
        seed->setZero(outputs.rows(), outputs.cols());
        if (form_ == Formulation::primal) {
            seed->col(1) = (t1 * mat_.a11 + t2 * mat_.a12).matrix();
            seed->col(2) = (t1 * mat_.a12 + t2 * mat_.a22).matrix();
        } else {
            // flux = Q^T R (zeta + Q g): dL/dg = Q^T R Q t, Q t = (-t2, t1)
            const Eigen::ArrayXd u1 = -mat_.r11 * t2 + mat_.r12 * t1;
            const Eigen::ArrayXd u2 = -mat_.r12 * t2 + mat_.r22 * t1;
            seed->col(1) = u2.matrix();
            seed->col(2) = (-u1).matrix();
        }
    }
    return loss;
}

}  // namespace homog
