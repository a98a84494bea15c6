#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace semiscale {

/// Dense 2-D scalar field, row-major: value(x, y) lives at y * width + x.
/// x runs along a row (columns), y along a column (rows).
class Grid2 {
public:
    Grid2() = default;
    Grid2(int width, int height, double fill = 0.0);
    Grid2(int width, int height, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(int x, int y) { return values_[index(x, y)]; }
    double operator()(int x, int y) const { return values_[index(x, y)]; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool same_shape(const Grid2& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Grid2&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

inline Grid2::Grid2(int width, int height, double fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

inline Grid2::Grid2(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("grid value count does not match its dimensions");
    }
}

/// Integer shift with the vacated pixels filled by `fill`: out(x+dx, y+dy) = in(x, y).
Grid2 shifted(const Grid2& field, int dx, int dy, double fill);

/// Rotation by 90 degrees counter-clockwise (in x-right, y-down pixel axes the
/// map is (x, y) -> (y, W-1-x)); square and non-square grids are supported.
Grid2 rotated90(const Grid2& field);

/// Mirror along the x axis: out(x, y) = in(W-1-x, y).
Grid2 flipped_x(const Grid2& field);

/// Largest absolute difference over pixels at least `margin` away from every border.
double max_abs_difference(const Grid2& a, const Grid2& b, int margin = 0);

}  // namespace semiscale
