#include "homog/quadrature.hpp"

#include <string>

#include "homog/error.hpp"

namespace homog {

CollocationGrid::CollocationGrid(int n) : n_(n) {
    if (n < 1) {
        throw ConfigError("grid needs n >= 1, got " + std::to_string(n));
    }
    points_.reserve(static_cast<std::size_t>(n) * n);
    const double h = UnitCell::side_length / n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            points_.emplace_back(h * i, h * j);
        }
    }
}

double cell_average(const CollocationGrid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) {
        throw ConfigError("quadrature expects " + std::to_string(grid.size()) + " values, got " +
                          std::to_string(values.size()));
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double integrate(const CollocationGrid& grid, std::span<const double> values) {
    return cell_average(grid, values) * UnitCell::area;
}

}  // namespace homog
