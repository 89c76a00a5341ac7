#pragma once

#include <Eigen/Core>
#include <numbers>

namespace homog {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;

/// The periodic cell X = [0, 2pi)^2.
struct UnitCell {
    static constexpr double side_length = 2.0 * kPi;
    static constexpr double area = side_length * side_length;
};

/// Conductivities of the matrix and of the central square inclusion.
struct PhasePair {
    double gamma_mat = 1.0;
    double gamma_inc = 0.1;

    /// Throws ConfigError unless both conductivities are strictly positive.
    void validate() const;
};

enum class MaterialKind { piecewise, smoothed };

/// Maps x into [0, 2pi).
double wrap_periodic(double x);

/// True when x lies strictly inside the inclusion (pi/2, 3pi/2)^2 after
/// wrapping. Points within 1e-12 of the interface count as matrix.
bool in_inclusion(const Vec2& x);

/// p_eps(x) = (1 + tanh(sin(x - pi/2) / eps)) / 2. Throws ConfigError for eps <= 0.
double smooth_indicator(double x, double eps);

/// d p_eps / dx.
double smooth_indicator_derivative(double x, double eps);

/// Isotropic two-phase conductivity field on the unit cell, either the sharp
/// piecewise-constant square inclusion or its smoothed approximation
///
///   gamma(x) = gamma_mat - (gamma_mat - gamma_inc) p_eps(x1) p_eps(x2).
///
/// Values are immutable; all queries are thread-safe.
class MaterialField {
public:
    static MaterialField piecewise(PhasePair phases);
    static MaterialField smoothed(PhasePair phases, double epsilon);

    MaterialKind kind() const { return kind_; }
    const PhasePair& phases() const { return phases_; }
    /// Transition width; zero for the piecewise field.
    double epsilon() const { return epsilon_; }
    bool is_homogeneous() const { return phases_.gamma_mat == phases_.gamma_inc; }

    double gamma(const Vec2& x) const;
    Mat2 conductivity(const Vec2& x) const { return gamma(x) * Mat2::Identity(); }
    Mat2 resistivity(const Vec2& x) const { return (1.0 / gamma(x)) * Mat2::Identity(); }

    /// Analytic spatial gradient of gamma. Throws ConfigError for the
    /// piecewise field, whose gradient does not exist on the interface.
    Vec2 conductivity_gradient(const Vec2& x) const;

private:
    MaterialField(MaterialKind kind, PhasePair phases, double epsilon)
        : kind_(kind), phases_(phases), epsilon_(epsilon) {}

    MaterialKind kind_;
    PhasePair phases_;
    double epsilon_;
};

/// Exact effective conductivity of the square-inclusion cell with inclusion
/// volume fraction 1/4:
///   gamma_mat * sqrt((gamma_mat + 3 gamma_inc) / (3 gamma_mat + gamma_inc)).
double obnosov_effective(const PhasePair& phases);

struct VoigtReuss {
    double upper;  ///< arithmetic volume average
    double lower;  ///< harmonic volume average
};

VoigtReuss voigt_reuss(const PhasePair& phases, double inclusion_fraction = 0.25);

}  // namespace homog
