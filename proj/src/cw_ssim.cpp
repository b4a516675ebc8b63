#include <cmath>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "mrqm/error.hpp"
#include "mrqm/normalize.hpp"
#include "mrqm/ref_metrics.hpp"

namespace mrqm {

namespace {

using detail::Complex;

// Raised-cosine radial transition centred on log2(r) in [edge - 1, edge]:
// returns the high-pass share; the low-pass share is sqrt(1 - hi^2).
double radial_high(double log_r, double edge) {
    if (log_r >= edge) return 1.0;
    if (log_r <= edge - 1.0) return 0.0;
    return std::cos(std::numbers::pi / 2.0 * (edge - log_r));
}

// Frequency-domain complex steerable pyramid. Each subband is the one-sided
// (analytic) response of one orientation at one radial octave.
class SteerablePyramid {
public:
    SteerablePyramid(std::size_t width, std::size_t height, int levels, int orientations)
        : width_(width), height_(height), levels_(levels), orientations_(orientations) {
        const std::size_t n = width * height;
        log_r_.resize(n);
        angle_.resize(n);
        for (std::size_t r = 0; r < height; ++r) {
            // Unshifted FFT layout: index k maps to frequency k or k - n.
            const double fy = 2.0 * static_cast<double>(r < (height + 1) / 2 ? static_cast<long>(r)
                                                                              : static_cast<long>(r) - static_cast<long>(height)) /
                              static_cast<double>(height);
            for (std::size_t c = 0; c < width; ++c) {
                const double fx = 2.0 * static_cast<double>(c < (width + 1) / 2 ? static_cast<long>(c)
                                                                               : static_cast<long>(c) - static_cast<long>(width)) /
                                  static_cast<double>(width);
                const double rad = std::hypot(fx, fy);
                log_r_[r * width + c] = rad > 0.0 ? std::log2(rad) : -std::numeric_limits<double>::infinity();
                angle_[r * width + c] = std::atan2(fy, fx);
            }
        }
        const int order = orientations - 1;
        // Normalisation of the cos^order angular profile so the orientations tile.
        const double log_const = (2.0 * order) * std::log(2.0) + 2.0 * std::lgamma(order + 1.0) -
                                 std::log(static_cast<double>(orientations)) - std::lgamma(2.0 * order + 1.0);
        alpha_ = std::exp(0.5 * log_const);
    }

    /// Visits the oriented subbands of the coarsest level of the transform of
    /// `spectrum`, at full resolution.
    template <typename Visitor>
    void for_each_band(const std::vector<Complex>& spectrum, Visitor&& visit) const {
        const std::size_t n = width_ * height_;
        std::vector<double> lowpass(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double hi = radial_high(log_r_[i], 0.0);
            lowpass[i] = std::sqrt(1.0 - hi * hi);
        }
        const int order = orientations_ - 1;
        std::vector<Complex> band(n);
        for (int level = 0; level < levels_; ++level) {
            const double edge = -1.0 - level;
            std::vector<double> radial(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double hi = radial_high(log_r_[i], edge);
                radial[i] = lowpass[i] * hi;
                lowpass[i] *= std::sqrt(1.0 - hi * hi);
            }
            if (level + 1 < levels_) continue;
            for (int o = 0; o < orientations_; ++o) {
                const double theta = std::numbers::pi * o / orientations_;
                for (std::size_t i = 0; i < n; ++i) {
                    double a = std::remainder(angle_[i] - theta, 2.0 * std::numbers::pi);
                    const double ang = std::abs(a) < std::numbers::pi / 2.0
                                           ? 2.0 * alpha_ * std::pow(std::cos(a), order)
                                           : 0.0;
                    band[i] = spectrum[i] * (radial[i] * ang);
                }
                detail::fft2(band, width_, height_, true);
                visit(band);
            }
        }
    }

private:
    std::size_t width_, height_;
    int levels_, orientations_;
    std::vector<double> log_r_, angle_;
    double alpha_ = 1.0;
};

std::vector<Complex> spectrum_of(const ImageGrid& image) {
    const auto scaled = minmax(image, 0.0, 255.0);
    std::vector<Complex> data(scaled.values().begin(), scaled.values().end());
    detail::fft2(data, image.width(), image.height(), false);
    return data;
}

// Level k is band-limited to 2^-(k+1) of Nyquist, so keeping every 2^k-th
// sample loses nothing.
std::vector<Complex> decimate(const std::vector<Complex>& band, std::size_t w, std::size_t h, std::size_t step,
                              std::size_t& out_w, std::size_t& out_h) {
    out_w = (w + step - 1) / step;
    out_h = (h + step - 1) / step;
    std::vector<Complex> out(out_w * out_h);
    for (std::size_t r = 0; r < out_h; ++r)
        for (std::size_t c = 0; c < out_w; ++c) out[r * out_w + c] = band[r * step * w + c * step];
    return out;
}

// Sums over every valid window x window block, row-major (h - win + 1) x (w - win + 1).
// Direct sums rather than running differences keep empty regions exactly zero.
template <typename T>
std::vector<T> box_sums(const std::vector<T>& v, std::size_t w, std::size_t h, std::size_t win) {
    const std::size_t ow = w - win + 1;
    const std::size_t oh = h - win + 1;
    std::vector<T> rows(oh * w, T{});
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t k = 0; k < win; ++k)
            for (std::size_t c = 0; c < w; ++c) rows[r * w + c] += v[(r + k) * w + c];
    std::vector<T> out(oh * ow, T{});
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            T acc{};
            for (std::size_t k = 0; k < win; ++k) acc += rows[r * w + c + k];
            out[r * ow + c] = acc;
        }
    return out;
}

} // namespace

double cw_ssim(const ImageGrid& image, const ImageGrid& reference, const CwSsimParams& params) {
    if (!image.same_shape(reference)) throw InvalidArgument("image dimensions differ");
    if (params.levels < 1 || params.levels > 16 || params.orientations < 1 || params.window < 1) {
        throw InvalidArgument("CW-SSIM needs levels in [1, 16] and orientations, window >= 1");
    }
    const std::size_t w = image.width();
    const std::size_t h = image.height();
    const std::size_t min_side = std::max(params.window << (params.levels - 1), std::size_t{8} << params.levels);
    if (std::min(w, h) < min_side) {
        throw InvalidArgument("CW-SSIM needs images of at least " + std::to_string(min_side) + "x" +
                              std::to_string(min_side) + " pixels");
    }
    const SteerablePyramid pyramid(w, h, params.levels, params.orientations);
    const std::size_t step = std::size_t{1} << (params.levels - 1);
    std::size_t bw = 0, bh = 0;
    std::vector<std::vector<Complex>> bands_i;
    pyramid.for_each_band(spectrum_of(image),
                          [&](const std::vector<Complex>& b) { bands_i.push_back(decimate(b, w, h, step, bw, bh)); });

    double total = 0.0;
    std::size_t index = 0;
    pyramid.for_each_band(spectrum_of(reference), [&](const std::vector<Complex>& full) {
        const auto d = decimate(full, w, h, step, bw, bh);
        const auto& c = bands_i[index++];
        std::vector<Complex> cross(c.size());
        std::vector<double> power(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            cross[i] = c[i] * std::conj(d[i]);
            power[i] = std::norm(c[i]) + std::norm(d[i]);
        }
        const auto num = box_sums(cross, bw, bh, params.window);
        const auto den = box_sums(power, bw, bh, params.window);
        double acc = 0.0;
        for (std::size_t i = 0; i < num.size(); ++i) {
            acc += (2.0 * std::abs(num[i]) + params.k) / (den[i] + params.k);
        }
        total += acc / static_cast<double>(num.size());
    });
    return total / static_cast<double>(index);
}

} // namespace mrqm
