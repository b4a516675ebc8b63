#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrqm/image.hpp"

namespace mrqm::detail {

/// Mutable scratch raster for intermediate results.
struct Plane {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(std::size_t w, std::size_t h, double value = 0.0) : width(w), height(h), data(w * h, value) {}
    explicit Plane(const ImageGrid& image)
        : width(image.width()), height(image.height()), data(image.values().begin(), image.values().end()) {}

    double& at(std::size_t row, std::size_t col) { return data[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return data[row * width + col]; }
    std::size_t size() const { return data.size(); }
};

/// Half-sample symmetric reflection (d c b a | a b c d | d c b a).
std::size_t reflect_index(long index, long n);

/// Normalized sampled Gaussian with 2 * radius + 1 taps.
std::vector<double> gaussian_kernel(double sigma, std::size_t radius);

/// Correlates every row (axis = 1, along columns) or every column (axis = 0,
/// along rows) with an odd-length kernel, reflect boundary.
Plane filter_axis(const Plane& in, std::span<const double> kernel, int axis);

/// Same kernel along both axes.
Plane filter_separable(const Plane& in, std::span<const double> kernel);

/// Gaussian smoothing with radius ceil(truncate * sigma).
Plane gaussian_filter(const Plane& in, double sigma, double truncate = 4.0);

/// Box mean of `size` taps along one axis; even sizes put the extra tap on
/// the leading side.
Plane uniform_filter_axis(const Plane& in, std::size_t size, int axis);

Plane multiply(const Plane& a, const Plane& b);

/// 2x2 block mean; odd trailing rows/columns are dropped.
Plane downsample2(const Plane& in);

} // namespace mrqm::detail
