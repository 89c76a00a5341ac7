#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "homog/cell_material.hpp"
#include "homog/error.hpp"

namespace homog {

/// Index of a jet component. The Hessian is stored as its upper triangle.
enum class JetComponent : int { value = 0, d1 = 1, d2 = 2, d11 = 3, d12 = 4, d22 = 5 };

inline constexpr int kJetSize = 6;

/// Value, spatial gradient and spatial Hessian of a scalar field at a point,
/// with exact sum, product and chain rules. The Hessian is symmetric by
/// construction because only (11, 12, 22) are stored.
struct Jet2 {
    std::array<double, kJetSize> c{};

    static Jet2 constant(double v) {
        Jet2 j;
        j.c[0] = v;
        return j;
    }
    /// The coordinate function x_axis evaluated at `x`.
    static Jet2 variable(double x, int axis) {
        Jet2 j;
        j.c[0] = x;
        j.c[1 + axis] = 1.0;
        return j;
    }

    double value() const { return c[0]; }
    double grad(int i) const { return c[1 + i]; }
    double hess(int i, int j) const { return i != j ? c[4] : c[i == 0 ? 3 : 5]; }
    double laplacian() const { return c[3] + c[5]; }
    Vec2 gradient() const { return {c[1], c[2]}; }

    double& operator[](JetComponent k) { return c[static_cast<int>(k)]; }
    double operator[](JetComponent k) const { return c[static_cast<int>(k)]; }

    Jet2& operator+=(const Jet2& o) {
        for (int k = 0; k < kJetSize; ++k) c[k] += o.c[k];
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        for (int k = 0; k < kJetSize; ++k) c[k] -= o.c[k];
        return *this;
    }
    Jet2& operator*=(double s) {
        for (double& v : c) v *= s;
        return *this;
    }
};

/// Derivatives of a scalar function f at a point: f, f', f'', f'''.
struct UnaryDerivs {
    double f0, f1, f2, f3;
};

inline UnaryDerivs tanh_derivs(double x) {
    const double t = std::tanh(x);
    const double s = 1.0 - t * t;
    return {t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)};
}
inline UnaryDerivs sin_derivs(double x) {
    const double s = std::sin(x), c = std::cos(x);
    return {s, c, -s, -c};
}
inline UnaryDerivs cos_derivs(double x) {
    const double s = std::sin(x), c = std::cos(x);
    return {c, -s, -c, s};
}
inline UnaryDerivs reciprocal_derivs(double x) {
    if (x == 0.0) {
        throw NumericalError("division by zero in jet expression");
    }
    const double r = 1.0 / x;
    return {r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r};
}

/// Chain rule: the jet of f(a).
inline Jet2 apply_unary(const Jet2& a, const UnaryDerivs& d) {
    Jet2 r;
    r.c[0] = d.f0;
    r.c[1] = d.f1 * a.c[1];
    r.c[2] = d.f1 * a.c[2];
    r.c[3] = d.f2 * a.c[1] * a.c[1] + d.f1 * a.c[3];
    r.c[4] = d.f2 * a.c[1] * a.c[2] + d.f1 * a.c[4];
    r.c[5] = d.f2 * a.c[2] * a.c[2] + d.f1 * a.c[5];
    return r;
}

/// Reverse of apply_unary: accumulates into `abar` the adjoint of the input
/// jet `a`, given the adjoint `rbar` of the output jet.
inline void unary_backward(const Jet2& a, const UnaryDerivs& d, const Jet2& rbar, Jet2& abar) {
    const double g1 = a.c[1], g2 = a.c[2];
    const double h11 = a.c[3], h12 = a.c[4], h22 = a.c[5];
    const double b0 = rbar.c[0], b1 = rbar.c[1], b2 = rbar.c[2];
    const double b11 = rbar.c[3], b12 = rbar.c[4], b22 = rbar.c[5];
    abar.c[0] += b0 * d.f1 + d.f2 * (b1 * g1 + b2 * g2) +
                 b11 * (d.f3 * g1 * g1 + d.f2 * h11) + b12 * (d.f3 * g1 * g2 + d.f2 * h12) +
                 b22 * (d.f3 * g2 * g2 + d.f2 * h22);
    abar.c[1] += b1 * d.f1 + d.f2 * (2.0 * b11 * g1 + b12 * g2);
    abar.c[2] += b2 * d.f1 + d.f2 * (2.0 * b22 * g2 + b12 * g1);
    abar.c[3] += b11 * d.f1;
    abar.c[4] += b12 * d.f1;
    abar.c[5] += b22 * d.f1;
}

inline Jet2 multiply(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.c[0] = a.c[0] * b.c[0];
    r.c[1] = a.c[1] * b.c[0] + a.c[0] * b.c[1];
    r.c[2] = a.c[2] * b.c[0] + a.c[0] * b.c[2];
    r.c[3] = a.c[3] * b.c[0] + 2.0 * a.c[1] * b.c[1] + a.c[0] * b.c[3];
    r.c[4] = a.c[4] * b.c[0] + a.c[1] * b.c[2] + a.c[2] * b.c[1] + a.c[0] * b.c[4];
    r.c[5] = a.c[5] * b.c[0] + 2.0 * a.c[2] * b.c[2] + a.c[0] * b.c[5];
    return r;
}

/// Reverse of multiply with respect to the first factor; call again with the
/// factors swapped for the second.
inline void multiply_backward(const Jet2& b, const Jet2& rbar, Jet2& abar) {
    abar.c[0] += rbar.c[0] * b.c[0] + rbar.c[1] * b.c[1] + rbar.c[2] * b.c[2] + rbar.c[3] * b.c[3] +
                 rbar.c[4] * b.c[4] + rbar.c[5] * b.c[5];
    abar.c[1] += rbar.c[1] * b.c[0] + 2.0 * rbar.c[3] * b.c[1] + rbar.c[4] * b.c[2];
    abar.c[2] += rbar.c[2] * b.c[0] + 2.0 * rbar.c[5] * b.c[2] + rbar.c[4] * b.c[1];
    abar.c[3] += rbar.c[3] * b.c[0];
    abar.c[4] += rbar.c[4] * b.c[0];
    abar.c[5] += rbar.c[5] * b.c[0];
}

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator-(Jet2 a) { return a *= -1.0; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) { return multiply(a, b); }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator+(Jet2 a, double s) {
    a.c[0] += s;
    return a;
}
inline Jet2 operator+(double s, Jet2 a) { return a + s; }
inline Jet2 operator-(Jet2 a, double s) { return a + (-s); }
inline Jet2 operator-(double s, const Jet2& a) { return (-a) + s; }
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * apply_unary(b, reciprocal_derivs(b.c[0])); }
inline Jet2 operator/(Jet2 a, double s) {
    if (s == 0.0) {
        throw NumericalError("division by zero in jet expression");
    }
    return a *= 1.0 / s;
}
inline Jet2 operator/(double s, const Jet2& a) { return s * apply_unary(a, reciprocal_derivs(a.c[0])); }

inline Jet2 tanh(const Jet2& a) { return apply_unary(a, tanh_derivs(a.c[0])); }
inline Jet2 sin(const Jet2& a) { return apply_unary(a, sin_derivs(a.c[0])); }
inline Jet2 cos(const Jet2& a) { return apply_unary(a, cos_derivs(a.c[0])); }

/// Evaluates f(x1, x2) with both arguments seeded as coordinate jets, giving
/// the value and exact first and second spatial derivatives.
template <class F>
Jet2 jet_eval(F&& f, const Vec2& x) {
    return f(Jet2::variable(x[0], 0), Jet2::variable(x[1], 1));
}

}  // namespace homog
