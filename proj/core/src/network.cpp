#include "homog/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <string>

#include "homog/error.hpp"

namespace homog {

void NetworkConfig::validate() const {
    if (n_periodic < 1 || n_hidden < 1 || n_layers < 1) {
        throw ConfigError("network sizes must be >= 1 (n_periodic=" + std::to_string(n_periodic) +
                          ", n_hidden=" + std::to_string(n_hidden) + ", n_layers=" + std::to_string(n_layers) + ")");
    }
}

std::size_t param_count(const NetworkConfig& config) {
    config.validate();
    const std::size_t np = static_cast<std::size_t>(config.n_periodic);
    const std::size_t nh = static_cast<std::size_t>(config.n_hidden);
    const std::size_t nl = static_cast<std::size_t>(config.n_layers);
    return 6 * np + 2 * np * nh + nh + (nl - 1) * (nh * nh + nh) + (nh + 1);
}

NetworkLayout::NetworkLayout(const NetworkConfig& config) {
    config.validate();
    const std::size_t np = static_cast<std::size_t>(config.n_periodic);
    const std::size_t nh = static_cast<std::size_t>(config.n_hidden);
    n_features = 2 * np;
    std::size_t offset = 6 * np;
    first_weights = offset;
    offset += nh * n_features;
    first_bias = offset;
    offset += nh;
    for (int l = 1; l < config.n_layers; ++l) {
        block_weights.push_back(offset);
        offset += nh * nh;
        block_bias.push_back(offset);
        offset += nh;
    }
    out_weights = offset;
    offset += nh;
    out_bias = offset;
    total = offset + 1;
}

PeriodicNet::PeriodicNet(NetworkConfig config, std::vector<double> params)
    : config_(config), layout_(config), params_(std::move(params)) {
    if (params_.size() != layout_.total) {
        throw ConfigError("parameter vector has " + std::to_string(params_.size()) + " entries, network expects " +
                          std::to_string(layout_.total));
    }
}

namespace {

// Portable uniform double in [-1, 1): std::uniform_real_distribution is not
// reproducible across standard libraries.
double symmetric_uniform(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
}

}  // namespace

PeriodicNet PeriodicNet::init(const NetworkConfig& config, std::uint64_t seed) {
    const NetworkLayout lay(config);
    std::vector<double> p(lay.total, 0.0);
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < lay.first_weights; ++k) {
        p[k] = symmetric_uniform(rng);
    }
    const std::size_t nh = static_cast<std::size_t>(config.n_hidden);
    auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t k = 0; k < count; ++k) p[offset + k] = scale * symmetric_uniform(rng);
    };
    fill(lay.first_weights, nh * lay.n_features, lay.n_features);
    for (std::size_t w : lay.block_weights) fill(w, nh * nh, nh);
    fill(lay.out_weights, nh, nh);
    return PeriodicNet(config, std::move(p));
}

PeriodicNet PeriodicNet::zeros(const NetworkConfig& config) {
    return PeriodicNet(config, std::vector<double>(param_count(config), 0.0));
}

Jet2 PeriodicNet::forward(const Vec2& x) const {
    return periodic_net_forward<Jet2, double>(config_, layout_, params_, Jet2::variable(x[0], 0),
                                              Jet2::variable(x[1], 1));
}

TVar PeriodicNet::forward_on_tape(Tape& tape, const Vec2& x) const {
    std::vector<TVar> p;
    p.reserve(params_.size());
    if (tape.parameter_count() == 0) {
        for (double v : params_) p.push_back(tape.parameter(v));
    } else if (tape.parameter_count() == params_.size()) {
        for (std::size_t k = 0; k < params_.size(); ++k) p.push_back(tape.parameter_var(k));
    } else {
        throw ConfigError("tape already holds " + std::to_string(tape.parameter_count()) +
                          " parameters, network has " + std::to_string(params_.size()));
    }
    const TVar x1 = tape.input(x[0], 0);
    const TVar x2 = tape.input(x[1], 1);
    return periodic_net_forward<TVar, TVar>(config_, layout_, std::span<const TVar>(p), x1, x2);
}

namespace {

constexpr char kMagic[4] = {'P', 'N', 'E', 'T'};

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw ConfigError("parameter file is truncated");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace

void save_params(const PeriodicNet& net, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("cannot open " + path.string() + " for writing");
    }
    os.write(kMagic, 4);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.config().n_periodic));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.config().n_hidden));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.config().n_layers));
    for (double v : net.params()) put_le<double>(os, v);
}

PeriodicNet load_params(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw ConfigError("cannot open " + path.string());
    }
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw ConfigError(path.string() + " is not a parameter file (bad magic)");
    }
    NetworkConfig cfg;
    cfg.n_periodic = static_cast<int>(get_le<std::uint32_t>(is));
    cfg.n_hidden = static_cast<int>(get_le<std::uint32_t>(is));
    cfg.n_layers = static_cast<int>(get_le<std::uint32_t>(is));
    std::vector<double> p(param_count(cfg));
    for (double& v : p) v = get_le<double>(is);
    if (is.peek() != std::char_traits<char>::eof()) {
        throw ConfigError(path.string() + " has trailing bytes after the parameter block");
    }
    return PeriodicNet(cfg, std::move(p));
}

void save_params_csv(const PeriodicNet& net, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open " + path.string() + " for writing");
    }
    os << "index,value\n" << std::setprecision(17);
    const auto p = net.params();
    for (std::size_t k = 0; k < p.size(); ++k) os << k << ',' << p[k] << '\n';
}

}  // namespace homog
