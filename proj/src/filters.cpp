#include "filters.hpp"

#include <cmath>

#include "mrqm/error.hpp"

namespace mrqm::detail {

std::size_t reflect_index(long index, long n) {
    if (n == 1) return 0;
    const long period = 2 * n;
    long i = index % period;
    if (i < 0) i += period;
    return static_cast<std::size_t>(i < n ? i : period - 1 - i);
}

std::vector<double> gaussian_kernel(double sigma, std::size_t radius) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        const double x = static_cast<double>(i) - static_cast<double>(radius);
        kernel[i] = std::exp(-0.5 * x * x / (sigma * sigma));
        sum += kernel[i];
    }
    for (double& k : kernel) k /= sum;
    return kernel;
}

Plane filter_axis(const Plane& in, std::span<const double> kernel, int axis) {
    const long radius = static_cast<long>(kernel.size() / 2);
    Plane out(in.width, in.height);
    const long w = static_cast<long>(in.width);
    const long h = static_cast<long>(in.height);
    if (axis == 1) {
        std::vector<double> padded(in.width + 2 * radius);
        for (long r = 0; r < h; ++r) {
            const double* row = in.data.data() + r * w;
            for (long i = -radius; i < w + radius; ++i) padded[i + radius] = row[reflect_index(i, w)];
            double* dst = out.data.data() + r * w;
            for (long c = 0; c < w; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * padded[c + k];
                dst[c] = acc;
            }
        }
    } else {
        std::vector<double> padded(in.height + 2 * radius);
        for (long c = 0; c < w; ++c) {
            for (long i = -radius; i < h + radius; ++i) padded[i + radius] = in.data[reflect_index(i, h) * w + c];
            for (long r = 0; r < h; ++r) {
                double acc = 0.0;
                for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * padded[r + k];
                out.data[r * w + c] = acc;
            }
        }
    }
    return out;
}

Plane filter_separable(const Plane& in, std::span<const double> kernel) {
    return filter_axis(filter_axis(in, kernel, 1), kernel, 0);
}

Plane gaussian_filter(const Plane& in, double sigma, double truncate) {
    const auto radius = static_cast<std::size_t>(std::ceil(truncate * sigma));
    const auto kernel = gaussian_kernel(sigma, radius);
    return filter_separable(in, kernel);
}

Plane uniform_filter_axis(const Plane& in, std::size_t size, int axis) {
    if (size == 0) throw InvalidArgument("uniform filter size must be positive");
    // Odd-length kernel with the trailing tap zeroed reproduces an even box.
    const std::size_t taps = size % 2 == 1 ? size : size + 1;
    std::vector<double> kernel(taps, 1.0 / static_cast<double>(size));
    if (taps != size) kernel.back() = 0.0;
    return filter_axis(in, kernel, axis);
}

Plane multiply(const Plane& a, const Plane& b) {
    Plane out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    return out;
}

Plane downsample2(const Plane& in) {
    Plane out(in.width / 2, in.height / 2);
    for (std::size_t r = 0; r < out.height; ++r) {
        for (std::size_t c = 0; c < out.width; ++c) {
            out.at(r, c) = 0.25 * (in.at(2 * r, 2 * c) + in.at(2 * r, 2 * c + 1) + in.at(2 * r + 1, 2 * c) +
                                   in.at(2 * r + 1, 2 * c + 1));
        }
    }
    return out;
}

} // namespace mrqm::detail
