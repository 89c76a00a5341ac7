#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "homog/jet.hpp"

namespace homog {

/// Reverse-mode tape whose nodes are Jet2 values.
///
/// Parameters enter as spatially constant leaves; spatial inputs enter as
/// coordinate jets, so every node carries value, gradient and Hessian with
/// respect to x. `gradient()` then differentiates the value of a scalar
/// loss node with respect to all parameters by reverse accumulation. A tape
/// has a single writer; use one tape per worker thread.
class Tape {
public:
    class Var {
    public:
        Var() = default;
        const Jet2& jet() const { return tape_->nodes_[id_].value; }
        double value() const { return jet().c[0]; }
        std::uint32_t id() const { return id_; }
        Tape* tape() const { return tape_; }

    private:
        friend class Tape;
        Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}
        Tape* tape_ = nullptr;
        std::uint32_t id_ = 0;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers the next parameter (index = number of earlier parameters).
    Var parameter(double value);
    Var input(double x, int axis);
    Var constant(double value);
    Var constant(const Jet2& value);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);
    Var scale(Var a, double s);
    Var shift(Var a, double s);
    Var tanh(Var a);
    Var sin(Var a);
    Var cos(Var a);
    Var reciprocal(Var a);
    /// Spatially constant node holding one component of `a`'s jet.
    Var component(Var a, JetComponent k);

    std::size_t parameter_count() const { return param_nodes_.size(); }
    /// The k-th registered parameter leaf.
    Var parameter_var(std::size_t k) { return Var(this, param_nodes_.at(k)); }
    std::size_t size() const { return nodes_.size(); }

    /// d(loss value)/d(theta_k) for every registered parameter. Throws
    /// ConfigError when `expected_params` differs from parameter_count().
    std::vector<double> gradient(Var loss, std::size_t expected_params) const;

    /// Recomputes every node from its leaves and returns the new value of
    /// `node`; identical operations make this bit-exact.
    Jet2 replay(Var node) const;

private:
    enum class Op : std::uint8_t { leaf, add, sub, mul, scale, shift, tanh, sin, cos, reciprocal, component };

    struct Node {
        Jet2 value;
        Op op = Op::leaf;
        std::uint32_t a = 0;
        std::uint32_t b = 0;
        double s = 0.0;
    };

    Var push(const Jet2& value, Op op, std::uint32_t a = 0, std::uint32_t b = 0, double s = 0.0);
    void check_owner(Var v) const;
    Jet2 evaluate(const Node& n, const std::vector<Jet2>& values) const;

    std::vector<Node> nodes_;
    std::vector<std::uint32_t> param_nodes_;
};

using TVar = Tape::Var;

inline TVar operator+(TVar a, TVar b) { return a.tape()->add(a, b); }
inline TVar operator-(TVar a, TVar b) { return a.tape()->sub(a, b); }
inline TVar operator*(TVar a, TVar b) { return a.tape()->mul(a, b); }
inline TVar operator/(TVar a, TVar b) { return a.tape()->div(a, b); }
inline TVar operator-(TVar a) { return a.tape()->scale(a, -1.0); }
inline TVar operator*(double s, TVar a) { return a.tape()->scale(a, s); }
inline TVar operator*(TVar a, double s) { return a.tape()->scale(a, s); }
inline TVar operator+(TVar a, double s) { return a.tape()->shift(a, s); }
inline TVar operator+(double s, TVar a) { return a.tape()->shift(a, s); }
inline TVar operator-(TVar a, double s) { return a.tape()->shift(a, -s); }
inline TVar operator-(double s, TVar a) { return a.tape()->shift(a.tape()->scale(a, -1.0), s); }
inline TVar operator/(TVar a, double s) { return a.tape()->scale(a, 1.0 / s); }
inline TVar operator/(double s, TVar a) { return a.tape()->scale(a.tape()->reciprocal(a), s); }
inline TVar tanh(TVar a) { return a.tape()->tanh(a); }
inline TVar sin(TVar a) { return a.tape()->sin(a); }
inline TVar cos(TVar a) { return a.tape()->cos(a); }

/// Gradient of `loss` with respect to `params`, which must be exactly the
/// parameters registered on the loss's tape.
std::vector<double> param_gradient(TVar loss, std::span<const double> params);

}  // namespace homog
