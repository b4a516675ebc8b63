#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

#include "filters.hpp"
#include "mrqm/error.hpp"
#include "mrqm/nr_metrics.hpp"

namespace mrqm {

namespace {

constexpr double kBlurProbability = 0.63;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct Sobel {
    detail::Plane gx, gy, magnitude;
};

Sobel sobel(const detail::Plane& p) {
    const long w = static_cast<long>(p.width), h = static_cast<long>(p.height);
    Sobel s{detail::Plane(p.width, p.height), detail::Plane(p.width, p.height), detail::Plane(p.width, p.height)};
    auto v = [&](long r, long c) { return p.at(detail::reflect_index(r, h), detail::reflect_index(c, w)); };
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            const double gx = (v(r - 1, c + 1) + 2.0 * v(r, c + 1) + v(r + 1, c + 1)) -
                              (v(r - 1, c - 1) + 2.0 * v(r, c - 1) + v(r + 1, c - 1));
            const double gy = (v(r + 1, c - 1) + 2.0 * v(r + 1, c) + v(r + 1, c + 1)) -
                              (v(r - 1, c - 1) + 2.0 * v(r - 1, c) + v(r - 1, c + 1));
            const auto i = static_cast<std::size_t>(r * w + c);
            s.gx.data[i] = gx;
            s.gy.data[i] = gy;
            s.magnitude.data[i] = std::hypot(gx, gy);
        }
    }
    return s;
}

// Width of every edge pixel along its detected axis; zero for non-edges.
std::vector<std::size_t> widths_of(const ImageGrid& image, const EdgeMap& edges) {
    std::vector<std::size_t> out(image.size(), 0);
    for (std::size_t r = 0; r < image.height(); ++r) {
        for (std::size_t c = 0; c < image.width(); ++c) {
            const std::size_t i = r * image.width() + c;
            if (edges.axis[0][i]) {
                out[i] = edge_width(image, r, c, 0);
            } else if (edges.axis[1][i]) {
                out[i] = edge_width(image, r, c, 1);
            }
        }
    }
    return out;
}

struct EdgeBlock {
    double jnb_width = 0.0;
    std::vector<std::size_t> widths;  ///< non-zero widths of its edge pixels
};

std::vector<EdgeBlock> edge_blocks(const ImageGrid& image, const DataRangeMode& mode, const JnbParams& params) {
    if (params.block < 1) throw InvalidArgument("JNB block size must be >= 1");
    if (!(params.beta > 0.0)) throw InvalidArgument("JNB beta must be positive");
    const double L = resolve_data_range(mode, image);
    const EdgeMap edges = canny_edges(image, mode);
    const auto widths = widths_of(image, edges);
    const std::size_t w = image.width(), h = image.height(), b = params.block;
    std::vector<EdgeBlock> out;
    for (std::size_t r0 = 0; r0 < h; r0 += b) {
        for (std::size_t c0 = 0; c0 < w; c0 += b) {
            const std::size_t r1 = std::min(h, r0 + b), c1 = std::min(w, c0 + b);
            std::size_t edge_count = 0;
            double lo = image(r0, c0), hi = lo;
            EdgeBlock block;
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t c = c0; c < c1; ++c) {
                    lo = std::min(lo, image(r, c));
                    hi = std::max(hi, image(r, c));
                    if (!edges.any(r, c)) continue;
                    ++edge_count;
                    if (widths[r * w + c] > 0) block.widths.push_back(widths[r * w + c]);
                }
            }
            const double area = static_cast<double>((r1 - r0) * (c1 - c0));
            if (!(static_cast<double>(edge_count) / area > params.edge_fraction)) continue;
            block.jnb_width = (hi - lo) / L <= 50.0 / 255.0 ? 5.0 : 3.0;
            out.push_back(std::move(block));
        }
    }
    return out;
}

} // namespace

std::size_t EdgeMap::count(int d) const {
    return static_cast<std::size_t>(std::count(axis[d].begin(), axis[d].end(), std::uint8_t{1}));
}

EdgeMap gradient_edges(const ImageGrid& image) {
    if (image.empty()) throw InvalidArgument("edge detection input is empty");
    const std::size_t w = image.width(), h = image.height();
    EdgeMap map;
    map.width = w;
    map.height = h;
    map.detector = EdgeMap::Detector::GradientRule;
    for (int d = 0; d < 2; ++d) {
        std::vector<double> grad(image.size(), 0.0);
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                if (d == 0 && c + 1 < w) grad[r * w + c] = std::abs(image(r, c + 1) - image(r, c));
                if (d == 1 && r + 1 < h) grad[r * w + c] = std::abs(image(r + 1, c) - image(r, c));
            }
        }
        const double mu = mean_of(grad);
        for (double& g : grad) {
            if (!(g > mu)) g = 0.0;
        }
        auto& e = map.axis[d];
        e.assign(image.size(), 0);
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t c = 0; c < w; ++c) {
                const double g = grad[r * w + c];
                if (g == 0.0) continue;
                double prev = 0.0, next = 0.0;
                if (d == 0) {
                    prev = c > 0 ? grad[r * w + c - 1] : 0.0;
                    next = c + 1 < w ? grad[r * w + c + 1] : 0.0;
                } else {
                    prev = r > 0 ? grad[(r - 1) * w + c] : 0.0;
                    next = r + 1 < h ? grad[(r + 1) * w + c] : 0.0;
                }
                e[r * w + c] = g > prev && g > next;
            }
        }
    }
    return map;
}

EdgeMap canny_edges(const ImageGrid& image, double t_low, double t_high, double sigma) {
    if (image.empty()) throw InvalidArgument("edge detection input is empty");
    if (!(t_low >= 0.0) || !(t_high >= t_low)) throw InvalidArgument("Canny thresholds need 0 <= low <= high");
    const std::size_t w = image.width(), h = image.height();
    const detail::Plane smoothed = detail::gaussian_filter(detail::Plane(image), sigma);
    const Sobel g = sobel(smoothed);

    // Non-maximum suppression along the gradient direction, quantized to 45 degrees.
    std::vector<std::uint8_t> thin(image.size(), 0);
    for (std::size_t r = 1; r + 1 < h; ++r) {
        for (std::size_t c = 1; c + 1 < w; ++c) {
            const std::size_t i = r * w + c;
            const double m = g.magnitude.data[i];
            if (m == 0.0) continue;
            double angle = std::atan2(g.gy.data[i], g.gx.data[i]) * 180.0 / std::numbers::pi;
            if (angle < 0.0) angle += 180.0;
            long dr = 0, dc = 0;
            if (angle < 22.5 || angle >= 157.5) {
                dc = 1;
            } else if (angle < 67.5) {
                dr = 1;
                dc = 1;
            } else if (angle < 112.5) {
                dr = 1;
            } else {
                dr = 1;
                dc = -1;
            }
            const double a = g.magnitude.data[(r + dr) * w + c + dc];
            const double b = g.magnitude.data[(r - dr) * w + c - dc];
            thin[i] = m > a && m >= b;
        }
    }

    // Hysteresis: weak pixels survive when 8-connected to a strong one.
    std::vector<std::uint8_t> keep(image.size(), 0);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (thin[i] && g.magnitude.data[i] >= t_high) {
            keep[i] = 1;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        const long r = static_cast<long>(i / w), c = static_cast<long>(i % w);
        for (long dr = -1; dr <= 1; ++dr) {
            for (long dc = -1; dc <= 1; ++dc) {
                const long rr = r + dr, cc = c + dc;
                if (rr < 0 || cc < 0 || rr >= static_cast<long>(h) || cc >= static_cast<long>(w)) continue;
                const std::size_t j = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
                if (keep[j] || !thin[j] || g.magnitude.data[j] < t_low) continue;
                keep[j] = 1;
                queue.push_back(j);
            }
        }
    }

    EdgeMap map;
    map.width = w;
    map.height = h;
    map.detector = EdgeMap::Detector::Canny;
    map.t_low = t_low;
    map.t_high = t_high;
    map.axis[0].assign(image.size(), 0);
    map.axis[1].assign(image.size(), 0);
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (!keep[i]) continue;
        const bool horizontal = std::abs(g.gx.data[i]) >= std::abs(g.gy.data[i]);
        map.axis[horizontal ? 0 : 1][i] = 1;
    }
    return map;
}

EdgeMap canny_edges(const ImageGrid& image, const DataRangeMode& mode) {
    const double L = resolve_data_range(mode, image);
    return canny_edges(image, 0.1 * L, 0.2 * L);
}

std::size_t edge_width(const ImageGrid& image, std::size_t row, std::size_t col, int d) {
    const long n = static_cast<long>(d == 0 ? image.width() : image.height());
    const long x = static_cast<long>(d == 0 ? col : row);
    auto at = [&](long k) {
        return d == 0 ? image(row, static_cast<std::size_t>(k)) : image(static_cast<std::size_t>(k), col);
    };
    int s = sign_of(at(std::min(x + 1, n - 1)) - at(std::max(x - 1, 0L)));
    if (s == 0) return 0;
    std::size_t width = 0;
    for (long k = x; k + 1 < n && sign_of(at(k + 1) - at(k)) == s; ++k) ++width;
    for (long k = x; k - 1 >= 0 && sign_of(at(k) - at(k - 1)) == s; --k) ++width;
    return width;
}

double blurred_edge_widths(const ImageGrid& image, const DataRangeMode& mode) {
    const EdgeMap edges = canny_edges(image, mode);
    double total = 0.0;
    int axes = 0;
    for (int d = 0; d < 2; ++d) {
        std::size_t count = 0;
        double sum = 0.0;
        for (std::size_t r = 0; r < image.height(); ++r) {
            for (std::size_t c = 0; c < image.width(); ++c) {
                if (!edges.axis[d][r * image.width() + c]) continue;
                ++count;
                sum += static_cast<double>(edge_width(image, r, c, d));
            }
        }
        if (count == 0) continue;
        total += sum / static_cast<double>(count);
        ++axes;
    }
    if (axes == 0) throw DegenerateError("BEW is undefined: no edges detected");
    return total / axes;
}

double jnb(const ImageGrid& image, const DataRangeMode& mode, const JnbParams& params) {
    const auto blocks = edge_blocks(image, mode, params);
    if (blocks.empty()) throw DegenerateError("JNB is undefined: no block has enough edge pixels");
    double total = 0.0;
    for (const auto& block : blocks) {
        double acc = 0.0;
        for (std::size_t wd : block.widths) acc += std::pow(static_cast<double>(wd) / block.jnb_width, params.beta);
        total += std::pow(acc, 1.0 / params.beta);
    }
    return total / static_cast<double>(blocks.size());
}

double cpbd(const ImageGrid& image, const DataRangeMode& mode, const JnbParams& params) {
    const auto blocks = edge_blocks(image, mode, params);
    std::size_t processed = 0, sharp = 0;
    for (const auto& block : blocks) {
        for (std::size_t wd : block.widths) {
            const double p = 1.0 - std::exp(-std::pow(static_cast<double>(wd) / block.jnb_width, params.beta));
            ++processed;
            sharp += p <= kBlurProbability;
        }
    }
    if (processed == 0) throw DegenerateError("CPBD is undefined: no processed edge pixels");
    return static_cast<double>(sharp) / static_cast<double>(processed);
}

} // namespace mrqm
