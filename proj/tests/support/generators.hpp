#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "homog/cell_material.hpp"
#include "homog/network.hpp"

namespace homog::testkit {

// Small hand-rolled generators for property tests. Each test owns its own
// instance with a fixed seed so failures reproduce.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    std::uint64_t seed() { return rng_(); }

    Vec2 point() { return {uniform(0.0, UnitCell::side_length), uniform(0.0, UnitCell::side_length)}; }
    Vec2 any_point() { return {uniform(-20.0, 20.0), uniform(-20.0, 20.0)}; }
    Vec2 unit_vector() {
        const double a = uniform(0.0, UnitCell::side_length);
        return {std::cos(a), std::sin(a)};
    }
    PhasePair phases() { return {log_uniform(0.01, 100.0), log_uniform(0.01, 100.0)}; }

    std::vector<double> vector(std::size_t n, double scale) {
        std::vector<double> v(n);
        for (double& x : v) x = uniform(-scale, scale);
        return v;
    }

    PeriodicNet net(const NetworkConfig& config, double scale = 1.0) {
        return PeriodicNet(config, vector(param_count(config), scale));
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline const NetworkConfig kNet65{4, 4, 1};
inline const NetworkConfig kNet391{10, 10, 2};
inline const NetworkConfig kNet1801{20, 20, 3};
inline const NetworkConfig kNet15601{50, 50, 5};

}  // namespace homog::testkit
