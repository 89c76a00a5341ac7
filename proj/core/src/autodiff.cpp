#include <cmath>
#include <string>

#include "homog/tape.hpp"

namespace homog {

TVar Tape::push(const Jet2& value, Op op, std::uint32_t a, std::uint32_t b, double s) {
    nodes_.push_back(Node{value, op, a, b, s});
    return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::check_owner(Var v) const {
    if (v.tape_ != this || v.id_ >= nodes_.size()) {
        throw ConfigError("tape variable does not belong to this tape");
    }
}

TVar Tape::parameter(double value) {
    Var v = push(Jet2::constant(value), Op::leaf);
    param_nodes_.push_back(v.id_);
    return v;
}

TVar Tape::input(double x, int axis) { return push(Jet2::variable(x, axis), Op::leaf); }
TVar Tape::constant(double value) { return push(Jet2::constant(value), Op::leaf); }
TVar Tape::constant(const Jet2& value) { return push(value, Op::leaf); }

TVar Tape::add(Var a, Var b) {
    check_owner(a), check_owner(b);
    return push(nodes_[a.id_].value + nodes_[b.id_].value, Op::add, a.id_, b.id_);
}

TVar Tape::sub(Var a, Var b) {
    check_owner(a), check_owner(b);
    return push(nodes_[a.id_].value - nodes_[b.id_].value, Op::sub, a.id_, b.id_);
}

TVar Tape::mul(Var a, Var b) {
    check_owner(a), check_owner(b);
    return push(multiply(nodes_[a.id_].value, nodes_[b.id_].value), Op::mul, a.id_, b.id_);
}

TVar Tape::div(Var a, Var b) { return mul(a, reciprocal(b)); }

TVar Tape::scale(Var a, double s) {
    check_owner(a);
    return push(nodes_[a.id_].value * s, Op::scale, a.id_, 0, s);
}

TVar Tape::shift(Var a, double s) {
    check_owner(a);
    return push(nodes_[a.id_].value + s, Op::shift, a.id_, 0, s);
}

TVar Tape::tanh(Var a) {
    check_owner(a);
    const Jet2& x = nodes_[a.id_].value;
    return push(apply_unary(x, tanh_derivs(x.c[0])), Op::tanh, a.id_);
}

TVar Tape::sin(Var a) {
    check_owner(a);
    const Jet2& x = nodes_[a.id_].value;
    return push(apply_unary(x, sin_derivs(x.c[0])), Op::sin, a.id_);
}

TVar Tape::cos(Var a) {
    check_owner(a);
    const Jet2& x = nodes_[a.id_].value;
    return push(apply_unary(x, cos_derivs(x.c[0])), Op::cos, a.id_);
}

TVar Tape::reciprocal(Var a) {
    check_owner(a);
    const Jet2& x = nodes_[a.id_].value;
    return push(apply_unary(x, reciprocal_derivs(x.c[0])), Op::reciprocal, a.id_);
}

TVar Tape::component(Var a, JetComponent k) {
    check_owner(a);
    return push(Jet2::constant(nodes_[a.id_].value[k]), Op::component, a.id_, static_cast<std::uint32_t>(k));
}

namespace {

UnaryDerivs derivs_for(double x, int op) {
    switch (op) {
        case 0: return tanh_derivs(x);
        case 1: return sin_derivs(x);
        case 2: return cos_derivs(x);
        default: return reciprocal_derivs(x);
    }
}

}  // namespace

std::vector<double> Tape::gradient(Var loss, std::size_t expected_params) const {
    check_owner(loss);
    if (expected_params != param_nodes_.size()) {
        throw ConfigError("parameter count mismatch: tape has " + std::to_string(param_nodes_.size()) +
                          " parameters, caller expects " + std::to_string(expected_params));
    }
    std::vector<Jet2> adj(loss.id_ + 1);
    adj[loss.id_].c[0] = 1.0;
    for (std::uint32_t i = loss.id_ + 1; i-- > 0;) {
        const Node& n = nodes_[i];
        const Jet2& r = adj[i];
        switch (n.op) {
            case Op::leaf:
                break;
            case Op::add:
                adj[n.a] += r;
                adj[n.b] += r;
                break;
            case Op::sub:
                adj[n.a] += r;
                adj[n.b] -= r;
                break;
            case Op::mul:
                multiply_backward(nodes_[n.b].value, r, adj[n.a]);
                multiply_backward(nodes_[n.a].value, r, adj[n.b]);
                break;
            case Op::scale:
                adj[n.a] += r * n.s;
                break;
            case Op::shift:
                adj[n.a] += r;
                break;
            case Op::tanh:
            case Op::sin:
            case Op::cos:
            case Op::reciprocal: {
                const Jet2& x = nodes_[n.a].value;
                const int kind = static_cast<int>(n.op) - static_cast<int>(Op::tanh);
                unary_backward(x, derivs_for(x.c[0], kind), r, adj[n.a]);
                break;
            }
            case Op::component:
                adj[n.a].c[n.b] += r.c[0];
                break;
        }
    }
    std::vector<double> grad(param_nodes_.size(), 0.0);
    for (std::size_t k = 0; k < param_nodes_.size(); ++k) {
        if (param_nodes_[k] <= loss.id_) {
            grad[k] = adj[param_nodes_[k]].c[0];
        }
    }
    return grad;
}

Jet2 Tape::evaluate(const Node& n, const std::vector<Jet2>& v) const {
    switch (n.op) {
        case Op::leaf: return n.value;
        case Op::add: return v[n.a] + v[n.b];
        case Op::sub: return v[n.a] - v[n.b];
        case Op::mul: return multiply(v[n.a], v[n.b]);
        case Op::scale: return v[n.a] * n.s;
        case Op::shift: return v[n.a] + n.s;
        case Op::tanh: return apply_unary(v[n.a], tanh_derivs(v[n.a].c[0]));
        case Op::sin: return apply_unary(v[n.a], sin_derivs(v[n.a].c[0]));
        case Op::cos: return apply_unary(v[n.a], cos_derivs(v[n.a].c[0]));
        case Op::reciprocal: return apply_unary(v[n.a], reciprocal_derivs(v[n.a].c[0]));
        case Op::component: return Jet2::constant(v[n.a].c[n.b]);
    }
    return {};
}

Jet2 Tape::replay(Var node) const {
    check_owner(node);
    std::vector<Jet2> values(node.id_ + 1);
    for (std::uint32_t i = 0; i <= node.id_; ++i) {
        values[i] = evaluate(nodes_[i], values);
    }
    return values[node.id_];
}

std::vector<double> param_gradient(TVar loss, std::span<const double> params) {
    if (loss.tape() == nullptr) {
        throw ConfigError("loss variable is not attached to a tape");
    }
    return loss.tape()->gradient(loss, params.size());
}

}  // namespace homog
