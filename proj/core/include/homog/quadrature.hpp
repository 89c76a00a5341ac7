#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "homog/cell_material.hpp"

namespace homog {

/// Uniform n x n grid of cell corners (2pi i / n, 2pi j / n), i, j = 0..n-1.
/// Point (i, j) has flat index i + n j (x1 fastest), matching the periodic
/// DoF numbering of the finite-element mesh with the same n.
class CollocationGrid {
public:
    explicit CollocationGrid(int n = 128);

    int n() const { return n_; }
    std::size_t size() const { return points_.size(); }
    double spacing() const { return UnitCell::side_length / n_; }
    double cell_area() const { return spacing() * spacing(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * j; }
    const Vec2& point(std::size_t k) const { return points_[k]; }
    std::span<const Vec2> points() const { return points_; }

private:
    int n_;
    std::vector<Vec2> points_;
};

/// Periodic trapezoidal rule over the cell. For periodic integrands on a
/// periodic uniform grid the composite rule is exactly mean(values) * |X|,
/// with no wrap-around row or column counted twice. The sum runs in index
/// order. Throws ConfigError when values.size() != grid.size().
double integrate(const CollocationGrid& grid, std::span<const double> values);

/// (1/|X|) * integrate(), i.e. the plain mean.
double cell_average(const CollocationGrid& grid, std::span<const double> values);

}  // namespace homog
