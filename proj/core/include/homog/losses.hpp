#pragma once

#include <Eigen/Core>
#include <memory>
#include <span>

#include "homog/batch_eval.hpp"
#include "homog/cell_material.hpp"
#include "homog/network.hpp"
#include "homog/quadrature.hpp"
#include "homog/test_bases.hpp"

namespace homog {

/// Which cell problem a network solves: the temperature fluctuation under a
/// macroscopic gradient xi, or the flux stream function under a
/// macroscopic flux zeta.
enum class Formulation { primal, dual };

/// The fixed 90 degree rotation Q = [[0, -1], [1, 0]] mapping a stream
/// function gradient to a divergence-free flux fluctuation. Using -Q instead
/// flips the sign of the stream function and leaves every loss and estimate
/// unchanged.
inline Mat2 rotation_q() {
    Mat2 q;
    q << 0.0, -1.0, 1.0, 0.0;
    return q;
}

/// Material data sampled once at a fixed point set.
struct MaterialSamples {
    Eigen::ArrayXd a11, a12, a22;  ///< conductivity tensor
    Eigen::ArrayXd r11, r12, r22;  ///< resistivity tensor
    Eigen::ArrayXd gamma;          ///< isotropic conductivity
    Eigen::ArrayXd dgamma1, dgamma2;  ///< filled for smoothed fields only
    bool has_gradient = false;

    static MaterialSamples sample(const MaterialField& material, std::span<const Vec2> points);
    std::size_t size() const { return static_cast<std::size_t>(gamma.size()); }
};

// Point-wise strong residuals from an output jet and local material data.
// Primal: div[gamma (xi + grad u)] = grad gamma . (xi + grad u) + gamma lap u.
// Dual: scalar curl of f = (1/gamma)(zeta + Q grad w), i.e. d1 f2 - d2 f1.
double strong_primal_residual(const Jet2& u, double gamma, const Vec2& grad_gamma, const Vec2& xi);
double strong_dual_residual(const Jet2& w, double gamma, const Vec2& grad_gamma, const Vec2& zeta);

/// Throw ConfigError for the piecewise material.
double strong_primal_residual(const PeriodicNet& net, const MaterialField& material, const Vec2& xi, const Vec2& x);
double strong_dual_residual(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta, const Vec2& x);

/// Mean of squared strong residuals over the grid, (1/|X|) integral of r^2.
double strong_primal_loss(const PeriodicNet& net, const MaterialField& material, const Vec2& xi,
                          const CollocationGrid& grid);
double strong_dual_loss(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta,
                        const CollocationGrid& grid);

/// r_n = integral of grad(phi_n)^T A (xi + grad u) by grid quadrature.
Eigen::VectorXd weak_residual_primal(const PeriodicNet& net, const MaterialField& material, const Vec2& xi,
                                     const BasisGradients& basis, const CollocationGrid& grid);
/// r_n = integral of (Q grad psi_n)^T A^{-1} (zeta + Q grad w) by grid quadrature.
Eigen::VectorXd weak_residual_dual(const PeriodicNet& net, const MaterialField& material, const Vec2& zeta,
                                   const BasisGradients& basis, const CollocationGrid& grid);

/// r^T G^{-1} r.
double gram_weighted_loss(const Eigen::VectorXd& r, const Gram& gram);

/// A training loss expressed as a function of the network output jets on a
/// fixed grid. evaluate() returns the loss and optionally its derivative
/// with respect to every output jet entry, which BatchEvaluator::backward
/// turns into a parameter gradient.
class Loss {
public:
    virtual ~Loss() = default;
    virtual DerivOrder order() const = 0;
    virtual Formulation formulation() const = 0;
    virtual double evaluate(const Eigen::MatrixXd& outputs, Eigen::MatrixXd* seed) const = 0;
};

class StrongLoss final : public Loss {
public:
    /// Throws ConfigError for the piecewise material.
    StrongLoss(Formulation form, const MaterialField& material, const Vec2& loading, const CollocationGrid& grid);

    DerivOrder order() const override { return DerivOrder::hessian; }
    Formulation formulation() const override { return form_; }
    double evaluate(const Eigen::MatrixXd& outputs, Eigen::MatrixXd* seed) const override;

    /// Per-point residuals for the given outputs.
    Eigen::VectorXd residuals(const Eigen::MatrixXd& outputs) const;

private:
    Formulation form_;
    Vec2 loading_;
    MaterialSamples mat_;
};

class WeakLoss final : public Loss {
public:
    WeakLoss(Formulation form, const MaterialField& material, const Vec2& loading, const CollocationGrid& grid,
             std::shared_ptr<const BasisGradients> basis, Gram gram);

    DerivOrder order() const override { return DerivOrder::gradient; }
    Formulation formulation() const override { return form_; }
    double evaluate(const Eigen::MatrixXd& outputs, Eigen::MatrixXd* seed) const override;

    Eigen::VectorXd residual_vector(const Eigen::MatrixXd& outputs) const;
    const Gram& gram() const { return gram_; }

private:
    /// Per-point flux paired with the test gradients: A(xi + grad u) for the
    /// primal, Q^T A^{-1}(zeta + Q grad w) for the dual.
    void fluxes(const Eigen::MatrixXd& outputs, Eigen::VectorXd& f1, Eigen::VectorXd& f2) const;

    Formulation form_;
    Vec2 loading_;
    MaterialSamples mat_;
    std::shared_ptr<const BasisGradients> basis_;
    Gram gram_;
    double weight_;
};

}  // namespace homog
