#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "homog/jet.hpp"
#include "homog/tape.hpp"

namespace homog {

/// Width and depth of a periodic network.
struct NetworkConfig {
    int n_periodic = 4;  ///< periodic-layer neurons (each emits one feature per coordinate)
    int n_hidden = 4;    ///< neurons per hidden layer
    int n_layers = 1;    ///< hidden layers: one plain tanh layer, then residual blocks

    void validate() const;
    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// 6 n_p + 2 n_p n_h + n_h + (L - 1)(n_h^2 + n_h) + n_h + 1.
std::size_t param_count(const NetworkConfig& config);

/// Offsets of each parameter block inside the flat parameter vector.
///
/// Layout: periodic layer as (u, v, b) triples for neuron i and coordinate j
/// at 3 (2 i + j); first hidden weights (row-major n_h x 2 n_p) and biases;
/// each residual block's weights (row-major n_h x n_h) and biases; output
/// weights and the output bias.
struct NetworkLayout {
    explicit NetworkLayout(const NetworkConfig& config);

    std::size_t n_features;
    std::size_t first_weights;
    std::size_t first_bias;
    std::vector<std::size_t> block_weights;  ///< one per residual block
    std::vector<std::size_t> block_bias;
    std::size_t out_weights;
    std::size_t out_bias;
    std::size_t total;
};

/// Periodic PINN: learnable cosine/sine periodic layer, a tanh layer, tanh
/// residual blocks and a linear scalar head. The output is exactly
/// 2pi-periodic in both coordinates for every parameter vector because x
/// enters only through cos(x_j) and sin(x_j).
class PeriodicNet {
public:
    PeriodicNet(NetworkConfig config, std::vector<double> params);

    /// Deterministic initialization: periodic-layer coefficients uniform in
    /// [-1, 1], weights uniform in [-1, 1] / sqrt(fan_in), biases zero.
    static PeriodicNet init(const NetworkConfig& config, std::uint64_t seed);
    static PeriodicNet zeros(const NetworkConfig& config);

    const NetworkConfig& config() const { return config_; }
    const NetworkLayout& layout() const { return layout_; }
    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }
    std::size_t size() const { return params_.size(); }

    /// Output jet (value, spatial gradient, spatial Hessian) at one point.
    Jet2 forward(const Vec2& x) const;
    double value(const Vec2& x) const { return forward(x).value(); }

    /// Records the forward pass at `x` on `tape`, with the parameters as
    /// tape leaves in layout order. The first call registers the leaves;
    /// later calls on the same tape reuse them. Returns the output node.
    TVar forward_on_tape(Tape& tape, const Vec2& x) const;

private:
    NetworkConfig config_;
    NetworkLayout layout_;
    std::vector<double> params_;
};

/// Forward pass generic over the jet type T and the parameter type P; shared
/// by the plain Jet2 evaluation and the tape recording.
template <class T, class P>
T periodic_net_forward(const NetworkConfig& cfg, const NetworkLayout& lay, std::span<const P> p, const T& x1,
                       const T& x2) {
    const std::size_t n_f = lay.n_features;
    const std::size_t n_h = static_cast<std::size_t>(cfg.n_hidden);
    std::vector<T> feats;
    feats.reserve(n_f);
    const T c[2] = {cos(x1), cos(x2)};
    const T s[2] = {sin(x1), sin(x2)};
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.n_periodic); ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const std::size_t o = 3 * (2 * i + j);
            feats.push_back(p[o] * c[j] + p[o + 1] * s[j] + p[o + 2]);
        }
    }
    std::vector<T> y;
    y.reserve(n_h);
    for (std::size_t k = 0; k < n_h; ++k) {
        const std::size_t row = lay.first_weights + k * n_f;
        T acc = p[row] * feats[0];
        for (std::size_t m = 1; m < n_f; ++m) acc = acc + p[row + m] * feats[m];
        y.push_back(tanh(acc + p[lay.first_bias + k]));
    }
    for (std::size_t l = 0; l < lay.block_weights.size(); ++l) {
        std::vector<T> next;
        next.reserve(n_h);
        for (std::size_t k = 0; k < n_h; ++k) {
            const std::size_t row = lay.block_weights[l] + k * n_h;
            T acc = p[row] * y[0];
            for (std::size_t m = 1; m < n_h; ++m) acc = acc + p[row + m] * y[m];
            next.push_back(y[k] + tanh(acc + p[lay.block_bias[l] + k]));
        }
        y = std::move(next);
    }
    T out = p[lay.out_weights] * y[0];
    for (std::size_t m = 1; m < n_h; ++m) out = out + p[lay.out_weights + m] * y[m];
    return out + p[lay.out_bias];
}

/// Binary format: 16-byte header ("PNET", then n_periodic, n_hidden,
/// n_layers as little-endian uint32) followed by the parameters as
/// little-endian float64.
void save_params(const PeriodicNet& net, const std::filesystem::path& path);
PeriodicNet load_params(const std::filesystem::path& path);
/// "index,value" rows with a header line.
void save_params_csv(const PeriodicNet& net, const std::filesystem::path& path);

}  // namespace homog
