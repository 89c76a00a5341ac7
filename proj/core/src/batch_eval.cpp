#include "homog/batch_eval.hpp"

#include <cmath>
#include <string>

#include "homog/error.hpp"

namespace homog {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMajor>;
using Weights = Eigen::Map<RowMajor>;

}  // namespace

int component_count(DerivOrder order) {
    switch (order) {
        case DerivOrder::value: return 1;
        case DerivOrder::gradient: return 3;
        case DerivOrder::hessian: return 6;
    }
    return 1;
}

void tanh_jet_forward(const Eigen::MatrixXd& pre, std::size_t count, int n_comp, Eigen::MatrixXd& out,
                      Eigen::MatrixXd& t) {
    const Eigen::Index cols = pre.cols();
    out.resize(pre.rows(), cols);
    t.resize(static_cast<Eigen::Index>(count), cols);
    const std::size_t n = count;
    for (Eigen::Index k = 0; k < cols; ++k) {
        const double* a = pre.col(k).data();
        double* y = out.col(k).data();
        double* tk = t.col(k).data();
        for (std::size_t p = 0; p < n; ++p) tk[p] = std::tanh(a[p]);
        for (std::size_t p = 0; p < n; ++p) y[p] = tk[p];
        if (n_comp == 1) continue;
        const double* a1 = a + n;
        const double* a2 = a + 2 * n;
        double* y1 = y + n;
        double* y2 = y + 2 * n;
        if (n_comp == 3) {
            for (std::size_t p = 0; p < n; ++p) {
                const double f1 = 1.0 - tk[p] * tk[p];
                y1[p] = f1 * a1[p];
                y2[p] = f1 * a2[p];
            }
            continue;
        }
        const double* a11 = a + 3 * n;
        const double* a12 = a + 4 * n;
        const double* a22 = a + 5 * n;
        double* y11 = y + 3 * n;
        double* y12 = y + 4 * n;
        double* y22 = y + 5 * n;
        for (std::size_t p = 0; p < n; ++p) {
            const double f1 = 1.0 - tk[p] * tk[p];
            const double f2 = -2.0 * tk[p] * f1;
            y1[p] = f1 * a1[p];
            y2[p] = f1 * a2[p];
            y11[p] = f2 * a1[p] * a1[p] + f1 * a11[p];
            y12[p] = f2 * a1[p] * a2[p] + f1 * a12[p];
            y22[p] = f2 * a2[p] * a2[p] + f1 * a22[p];
        }
    }
}

void tanh_jet_backward(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& t, std::size_t count, int n_comp,
                       const Eigen::MatrixXd& out_adj, Eigen::MatrixXd& pre_adj) {
    const Eigen::Index cols = pre.cols();
    pre_adj.resize(pre.rows(), cols);
    const std::size_t n = count;
    for (Eigen::Index k = 0; k < cols; ++k) {
        const double* a = pre.col(k).data();
        const double* tk = t.col(k).data();
        const double* b = out_adj.col(k).data();
        double* r = pre_adj.col(k).data();
        if (n_comp == 1) {
            for (std::size_t p = 0; p < n; ++p) r[p] = b[p] * (1.0 - tk[p] * tk[p]);
            continue;
        }
        if (n_comp == 3) {
            for (std::size_t p = 0; p < n; ++p) {
                const double f1 = 1.0 - tk[p] * tk[p];
                const double f2 = -2.0 * tk[p] * f1;
                const double b1 = b[n + p], b2 = b[2 * n + p];
                r[p] = b[p] * f1 + f2 * (b1 * a[n + p] + b2 * a[2 * n + p]);
                r[n + p] = b1 * f1;
                r[2 * n + p] = b2 * f1;
            }
            continue;
        }
        for (std::size_t p = 0; p < n; ++p) {
            const double tt = tk[p];
            const double f1 = 1.0 - tt * tt;
            const double f2 = -2.0 * tt * f1;
            const double f3 = -2.0 * f1 * (1.0 - 3.0 * tt * tt);
            const double g1 = a[n + p], g2 = a[2 * n + p];
            const double h11 = a[3 * n + p], h12 = a[4 * n + p], h22 = a[5 * n + p];
            const double b0 = b[p], b1 = b[n + p], b2 = b[2 * n + p];
            const double b11 = b[3 * n + p], b12 = b[4 * n + p], b22 = b[5 * n + p];
            r[p] = b0 * f1 + f2 * (b1 * g1 + b2 * g2) + b11 * (f3 * g1 * g1 + f2 * h11) +
                   b12 * (f3 * g1 * g2 + f2 * h12) + b22 * (f3 * g2 * g2 + f2 * h22);
            r[n + p] = b1 * f1 + f2 * (2.0 * b11 * g1 + b12 * g2);
            r[2 * n + p] = b2 * f1 + f2 * (2.0 * b22 * g2 + b12 * g1);
            r[3 * n + p] = b11 * f1;
            r[4 * n + p] = b12 * f1;
            r[5 * n + p] = b22 * f1;
        }
    }
}

BatchEvaluator::BatchEvaluator(std::span<const Vec2> points, DerivOrder order, ParallelOptions parallel,
                               std::size_t chunk_size)
    : n_points_(points.size()), order_(order), n_comp_(component_count(order)), parallel_(parallel) {
    if (points.empty()) {
        throw ConfigError("batch evaluator needs at least one point");
    }
    if (chunk_size == 0) chunk_size = points.size();
    for (std::size_t begin = 0; begin < points.size(); begin += chunk_size) {
        Chunk ch;
        ch.begin = begin;
        ch.count = std::min(chunk_size, points.size() - begin);
        ch.trig.resize(static_cast<Eigen::Index>(ch.count), 4);
        for (std::size_t p = 0; p < ch.count; ++p) {
            const Vec2& x = points[begin + p];
            const auto i = static_cast<Eigen::Index>(p);
            ch.trig(i, 0) = std::cos(x[0]);
            ch.trig(i, 1) = std::cos(x[1]);
            ch.trig(i, 2) = std::sin(x[0]);
            ch.trig(i, 3) = std::sin(x[1]);
        }
        chunks_.push_back(std::move(ch));
    }
    outputs_.resize(static_cast<Eigen::Index>(n_points_), n_comp_);
}

void BatchEvaluator::forward_chunk(const PeriodicNet& net, Chunk& ch) {
    const NetworkConfig& cfg = net.config();
    const NetworkLayout& lay = net.layout();
    const double* p = net.params().data();
    const auto cnt = static_cast<Eigen::Index>(ch.count);
    const Eigen::Index rows = cnt * n_comp_;
    const auto n_f = static_cast<Eigen::Index>(lay.n_features);
    const auto n_h = static_cast<Eigen::Index>(cfg.n_hidden);
    const std::size_t n_layers = static_cast<std::size_t>(cfg.n_layers);

    ch.features.setZero(rows, n_f);
    for (Eigen::Index r = 0; r < n_f; ++r) {
        const int j = static_cast<int>(r % 2);
        const double u = p[3 * r], v = p[3 * r + 1], b = p[3 * r + 2];
        const auto c = ch.trig.col(j);
        const auto s = ch.trig.col(2 + j);
        auto col = ch.features.col(r);
        col.segment(0, cnt) = (u * c + v * s + b).matrix();
        if (n_comp_ >= 3) {
            col.segment((1 + j) * cnt, cnt) = (v * c - u * s).matrix();
        }
        if (n_comp_ == 6) {
            col.segment((j == 0 ? 3 : 5) * cnt, cnt) = (-u * c - v * s).matrix();
        }
    }

    ch.pre.resize(n_layers);
    ch.post.resize(n_layers);
    ch.tanhs.resize(n_layers);

    const ConstWeights w1(p + lay.first_weights, n_h, n_f);
    const Eigen::Map<const Eigen::RowVectorXd> b1(p + lay.first_bias, n_h);
    ch.pre[0].noalias() = ch.features * w1.transpose();
    ch.pre[0].topRows(cnt).rowwise() += b1;
    tanh_jet_forward(ch.pre[0], ch.count, n_comp_, ch.post[0], ch.tanhs[0]);

    for (std::size_t l = 1; l < n_layers; ++l) {
        const ConstWeights w(p + lay.block_weights[l - 1], n_h, n_h);
        const Eigen::Map<const Eigen::RowVectorXd> b(p + lay.block_bias[l - 1], n_h);
        ch.pre[l].noalias() = ch.post[l - 1] * w.transpose();
        ch.pre[l].topRows(cnt).rowwise() += b;
        tanh_jet_forward(ch.pre[l], ch.count, n_comp_, ch.post[l], ch.tanhs[l]);
        ch.post[l] += ch.post[l - 1];
    }

    const Eigen::Map<const Eigen::VectorXd> w_out(p + lay.out_weights, n_h);
    Eigen::VectorXd out = ch.post[n_layers - 1] * w_out;
    out.head(cnt).array() += p[lay.out_bias];
    for (int c = 0; c < n_comp_; ++c) {
        outputs_.block(static_cast<Eigen::Index>(ch.begin), c, cnt, 1) = out.segment(c * cnt, cnt);
    }
}

const Eigen::MatrixXd& BatchEvaluator::forward(const PeriodicNet& net) {
    parallel_for(chunks_.size(), parallel_.threads, [&](std::size_t i) { forward_chunk(net, chunks_[i]); });
    have_forward_ = true;
    last_config_ = net.config();
    return outputs_;
}

void BatchEvaluator::backward_chunk(const PeriodicNet& net, Chunk& ch, const Eigen::MatrixXd& adjoint,
                                    std::span<double> grad) {
    const NetworkConfig& cfg = net.config();
    const NetworkLayout& lay = net.layout();
    const double* p = net.params().data();
    double* g = grad.data();
    const auto cnt = static_cast<Eigen::Index>(ch.count);
    const Eigen::Index rows = cnt * n_comp_;
    const auto n_f = static_cast<Eigen::Index>(lay.n_features);
    const auto n_h = static_cast<Eigen::Index>(cfg.n_hidden);
    const std::size_t n_layers = static_cast<std::size_t>(cfg.n_layers);

    Eigen::VectorXd out_adj(rows);
    for (int c = 0; c < n_comp_; ++c) {
        out_adj.segment(c * cnt, cnt) = adjoint.block(static_cast<Eigen::Index>(ch.begin), c, cnt, 1);
    }

    const Eigen::Map<const Eigen::RowVectorXd> w_out(p + lay.out_weights, n_h);
    Eigen::Map<Eigen::VectorXd>(g + lay.out_weights, n_h).noalias() += ch.post[n_layers - 1].transpose() * out_adj;
    g[lay.out_bias] += out_adj.head(cnt).sum();
    ch.y_adj.noalias() = out_adj * w_out;

    for (std::size_t l = n_layers; l-- > 1;) {
        tanh_jet_backward(ch.pre[l], ch.tanhs[l], ch.count, n_comp_, ch.y_adj, ch.a_adj);
        const ConstWeights w(p + lay.block_weights[l - 1], n_h, n_h);
        Weights gw(g + lay.block_weights[l - 1], n_h, n_h);
        gw.noalias() += ch.a_adj.transpose() * ch.post[l - 1];
        Eigen::Map<Eigen::RowVectorXd>(g + lay.block_bias[l - 1], n_h) += ch.a_adj.topRows(cnt).colwise().sum();
        ch.y_adj.noalias() += ch.a_adj * w;
    }

    tanh_jet_backward(ch.pre[0], ch.tanhs[0], ch.count, n_comp_, ch.y_adj, ch.a_adj);
    const ConstWeights w1(p + lay.first_weights, n_h, n_f);
    Weights gw1(g + lay.first_weights, n_h, n_f);
    gw1.noalias() += ch.a_adj.transpose() * ch.features;
    Eigen::Map<Eigen::RowVectorXd>(g + lay.first_bias, n_h) += ch.a_adj.topRows(cnt).colwise().sum();
    ch.f_adj.noalias() = ch.a_adj * w1;

    for (Eigen::Index r = 0; r < n_f; ++r) {
        const int j = static_cast<int>(r % 2);
        const auto c = ch.trig.col(j).matrix();
        const auto s = ch.trig.col(2 + j).matrix();
        const auto fv = ch.f_adj.col(r).segment(0, cnt);
        double du = fv.dot(c);
        double dv = fv.dot(s);
        const double db = fv.sum();
        if (n_comp_ >= 3) {
            const auto fd = ch.f_adj.col(r).segment((1 + j) * cnt, cnt);
            du -= fd.dot(s);
            dv += fd.dot(c);
        }
        if (n_comp_ == 6) {
            const auto fh = ch.f_adj.col(r).segment((j == 0 ? 3 : 5) * cnt, cnt);
            du -= fh.dot(c);
            dv -= fh.dot(s);
        }
        g[3 * r] += du;
        g[3 * r + 1] += dv;
        g[3 * r + 2] += db;
    }
}

std::vector<double> BatchEvaluator::backward(const PeriodicNet& net, const Eigen::MatrixXd& output_adjoint) {
    if (!have_forward_ || !(last_config_ == net.config())) {
        throw ConfigError("backward() requires a preceding forward() with the same network configuration");
    }
    if (output_adjoint.rows() != static_cast<Eigen::Index>(n_points_) || output_adjoint.cols() != n_comp_) {
        throw ConfigError("output adjoint has shape " + std::to_string(output_adjoint.rows()) + "x" +
                          std::to_string(output_adjoint.cols()) + ", expected " + std::to_string(n_points_) + "x" +
                          std::to_string(n_comp_));
    }
    std::vector<double> grad;
    parallel_reduce(chunks_.size(), net.size(), parallel_,
                    [&](std::size_t i, std::span<double> g) { backward_chunk(net, chunks_[i], output_adjoint, g); },
                    grad);
    return grad;
}

}  // namespace homog
