#include "homog/cell_material.hpp"

#include <cmath>
#include <string>

#include "homog/error.hpp"

namespace homog {

namespace {

constexpr double kInterfaceTolerance = 1e-12;

void require_positive_epsilon(double eps) {
    if (!(eps > 0.0)) {
        throw ConfigError("smoothing parameter epsilon must be > 0, got " + std::to_string(eps));
    }
}

bool inside_open_interval(double t) {
    const double lo = 0.5 * kPi + kInterfaceTolerance;
    const double hi = 1.5 * kPi - kInterfaceTolerance;
    return t > lo && t < hi;
}

}  // namespace

void PhasePair::validate() const {
    if (!(gamma_mat > 0.0) || !(gamma_inc > 0.0)) {
        throw ConfigError("phase conductivities must be > 0 (gamma_mat=" + std::to_string(gamma_mat) +
                          ", gamma_inc=" + std::to_string(gamma_inc) + ")");
    }
}

double wrap_periodic(double x) {
    const double period = UnitCell::side_length;
    if (x >= 0.0 && x < period) {
        return x;
    }
    double r = x - period * std::floor(x / period);
    // floor can land exactly on the period for tiny negative inputs
    if (r >= period) {
        r -= period;
    }
    return r;
}

bool in_inclusion(const Vec2& x) {
    return inside_open_interval(wrap_periodic(x[0])) && inside_open_interval(wrap_periodic(x[1]));
}

double smooth_indicator(double x, double eps) {
    require_positive_epsilon(eps);
    return 0.5 * (1.0 + std::tanh(std::sin(x - 0.5 * kPi) / eps));
}

double smooth_indicator_derivative(double x, double eps) {
    require_positive_epsilon(eps);
    const double t = std::tanh(std::sin(x - 0.5 * kPi) / eps);
    return 0.5 * (1.0 - t * t) * std::cos(x - 0.5 * kPi) / eps;
}

MaterialField MaterialField::piecewise(PhasePair phases) {
    phases.validate();
    return MaterialField(MaterialKind::piecewise, phases, 0.0);
}

MaterialField MaterialField::smoothed(PhasePair phases, double epsilon) {
    phases.validate();
    require_positive_epsilon(epsilon);
    return MaterialField(MaterialKind::smoothed, phases, epsilon);
}

double MaterialField::gamma(const Vec2& x) const {
    if (kind_ == MaterialKind::piecewise) {
        return in_inclusion(x) ? phases_.gamma_inc : phases_.gamma_mat;
    }
    const double contrast = phases_.gamma_mat - phases_.gamma_inc;
    return phases_.gamma_mat - contrast * smooth_indicator(x[0], epsilon_) * smooth_indicator(x[1], epsilon_);
}

Vec2 MaterialField::conductivity_gradient(const Vec2& x) const {
    if (kind_ == MaterialKind::piecewise) {
        throw ConfigError("conductivity gradient is undefined for the piecewise material");
    }
    const double contrast = phases_.gamma_mat - phases_.gamma_inc;
    const double p1 = smooth_indicator(x[0], epsilon_);
    const double p2 = smooth_indicator(x[1], epsilon_);
    const double d1 = smooth_indicator_derivative(x[0], epsilon_);
    const double d2 = smooth_indicator_derivative(x[1], epsilon_);
    return Vec2(-contrast * d1 * p2, -contrast * p1 * d2);
}

double obnosov_effective(const PhasePair& phases) {
    phases.validate();
    const double m = phases.gamma_mat;
    const double i = phases.gamma_inc;
    return m * std::sqrt((m + 3.0 * i) / (3.0 * m + i));
}

VoigtReuss voigt_reuss(const PhasePair& phases, double inclusion_fraction) {
    phases.validate();
    if (!(inclusion_fraction >= 0.0 && inclusion_fraction <= 1.0)) {
        throw ConfigError("inclusion fraction must lie in [0, 1]");
    }
    const double f = inclusion_fraction;
    const double upper = f * phases.gamma_inc + (1.0 - f) * phases.gamma_mat;
    const double lower = 1.0 / (f / phases.gamma_inc + (1.0 - f) / phases.gamma_mat);
    return {upper, lower};
}

}  // namespace homog
