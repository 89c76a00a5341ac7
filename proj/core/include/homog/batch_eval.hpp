#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "homog/cell_material.hpp"
#include "homog/network.hpp"
#include "homog/parallel.hpp"

namespace homog {

/// Highest spatial derivative carried through a batched evaluation.
enum class DerivOrder { value = 0, gradient = 1, hessian = 2 };

/// Number of jet components carried at a given order (1, 3 or 6).
int component_count(DerivOrder order);

/// Batched forward and reverse passes of a PeriodicNet over a fixed point set.
///
/// Activations are stored points-major per jet component, so each dense
/// layer is one matrix product acting identically on every component. The
/// reverse pass walks the same layers backwards, which yields exact
/// gradients of any function of the output jets with respect to all
/// parameters. Points are split into chunks processed independently; chunk
/// gradients are reduced in chunk order when `deterministic` is set.
class BatchEvaluator {
public:
    BatchEvaluator(std::span<const Vec2> points, DerivOrder order, ParallelOptions parallel = {},
                   std::size_t chunk_size = 1024);

    std::size_t point_count() const { return n_points_; }
    DerivOrder order() const { return order_; }
    int components() const { return n_comp_; }

    /// Output jets, one row per point and one column per component in the
    /// order value, d1, d2, d11, d12, d22 (truncated to the carried order).
    /// Activations are kept for a following backward().
    const Eigen::MatrixXd& forward(const PeriodicNet& net);

    /// Gradient of sum_{p,c} adjoint(p, c) * output(p, c) with respect to the
    /// parameters of the net passed to the preceding forward().
    std::vector<double> backward(const PeriodicNet& net, const Eigen::MatrixXd& output_adjoint);

private:
    struct Chunk {
        std::size_t begin = 0;
        std::size_t count = 0;
        Eigen::ArrayXXd trig;                // count x 4: cos x1, cos x2, sin x1, sin x2
        Eigen::MatrixXd features;            // (C count) x n_features
        std::vector<Eigen::MatrixXd> pre;    // per hidden layer, (C count) x n_h
        std::vector<Eigen::MatrixXd> post;   // per hidden layer, (C count) x n_h
        std::vector<Eigen::MatrixXd> tanhs;  // per hidden layer, count x n_h
        Eigen::MatrixXd y_adj, a_adj, f_adj;  // reverse-pass scratch
    };

    void forward_chunk(const PeriodicNet& net, Chunk& ch);
    void backward_chunk(const PeriodicNet& net, Chunk& ch, const Eigen::MatrixXd& adjoint, std::span<double> grad);

    std::size_t n_points_;
    DerivOrder order_;
    int n_comp_;
    ParallelOptions parallel_;
    std::vector<Chunk> chunks_;
    Eigen::MatrixXd outputs_;
    bool have_forward_ = false;
    NetworkConfig last_config_;
};

/// Tanh applied to the jets stored column-wise in `pre` (component blocks of
/// `count` rows). Writes tanh jets to `out` and the plain tanh values to `t`.
void tanh_jet_forward(const Eigen::MatrixXd& pre, std::size_t count, int n_comp, Eigen::MatrixXd& out,
                      Eigen::MatrixXd& t);

/// Adjoint of tanh_jet_forward: overwrites `pre_adj` with the adjoint of
/// `pre` given the adjoint `out_adj` of the tanh jets.
void tanh_jet_backward(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& t, std::size_t count, int n_comp,
                       const Eigen::MatrixXd& out_adj, Eigen::MatrixXd& pre_adj);

}  // namespace homog
