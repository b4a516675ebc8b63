#include "mrqm/nr_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filters.hpp"
#include "mrqm/error.hpp"

namespace mrqm {

namespace {

void check_image(const ImageGrid& image, const char* metric) {
    if (image.empty()) throw InvalidArgument(std::string(metric) + " input is empty");
}

// |I(x + e_d) - I(x)| summed over all x with a neighbour along d.
double gradient_sum(const detail::Plane& p, int d) {
    double s = 0.0;
    const std::size_t w = p.width, h = p.height;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            if (d == 0 && c + 1 < w) s += std::abs(p.at(r, c + 1) - p.at(r, c));
            if (d == 1 && r + 1 < h) s += std::abs(p.at(r + 1, c) - p.at(r, c));
        }
    }
    return s;
}

double positive_loss(const detail::Plane& sharp, const detail::Plane& blurred, int d) {
    double s = 0.0;
    const std::size_t w = sharp.width, h = sharp.height;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            double a = 0.0, b = 0.0;
            if (d == 0 && c + 1 < w) {
                a = std::abs(sharp.at(r, c + 1) - sharp.at(r, c));
                b = std::abs(blurred.at(r, c + 1) - blurred.at(r, c));
            } else if (d == 1 && r + 1 < h) {
                a = std::abs(sharp.at(r + 1, c) - sharp.at(r, c));
                b = std::abs(blurred.at(r + 1, c) - blurred.at(r, c));
            }
            s += std::max(0.0, a - b);
        }
    }
    return s;
}

// Mean correlation over the line pairs (i, i + gap); constant lines skipped.
struct PairMean {
    double sum = 0.0;
    std::size_t count = 0;
};

PairMean line_correlations(const ImageGrid& image, bool columns, std::size_t gap) {
    const std::size_t w = image.width(), h = image.height();
    const std::size_t lines = columns ? w : h;
    const std::size_t length = columns ? h : w;
    std::vector<double> mean(lines, 0.0), norm(lines, 0.0);
    auto at = [&](std::size_t line, std::size_t k) { return columns ? image(k, line) : image(line, k); };
    for (std::size_t i = 0; i < lines; ++i) {
        double m = 0.0;
        for (std::size_t k = 0; k < length; ++k) m += at(i, k);
        m /= static_cast<double>(length);
        double ss = 0.0;
        for (std::size_t k = 0; k < length; ++k) ss += (at(i, k) - m) * (at(i, k) - m);
        mean[i] = m;
        norm[i] = std::sqrt(ss);
    }
    PairMean out;
    for (std::size_t i = 0; i + gap < lines; ++i) {
        const std::size_t j = i + gap;
        if (!(norm[i] > 0.0) || !(norm[j] > 0.0)) continue;
        double sxy = 0.0;
        for (std::size_t k = 0; k < length; ++k) sxy += (at(i, k) - mean[i]) * (at(j, k) - mean[j]);
        out.sum += std::clamp(sxy / (norm[i] * norm[j]), -1.0, 1.0);
        ++out.count;
    }
    return out;
}

double line_metric(const ImageGrid& image, std::size_t col_gap, std::size_t row_gap, const char* name) {
    check_image(image, name);
    if (image.width() < 2 || image.height() < 2) {
        throw InvalidArgument(std::string(name) + " needs at least 2 rows and 2 columns");
    }
    const PairMean cols = line_correlations(image, true, col_gap);
    const PairMean rows = line_correlations(image, false, row_gap);
    if (cols.count == 0 && rows.count == 0) {
        throw DegenerateError(std::string(name) + " is undefined: every line pair contains a constant line");
    }
    if (cols.count == 0) return rows.sum / static_cast<double>(rows.count);
    if (rows.count == 0) return cols.sum / static_cast<double>(cols.count);
    return 0.5 * (cols.sum / static_cast<double>(cols.count) + rows.sum / static_cast<double>(rows.count));
}

} // namespace

double blur_effect(const ImageGrid& image, std::size_t k) {
    check_image(image, "BE");
    if (k < 1) throw InvalidArgument("BE kernel size must be >= 1");
    const detail::Plane p(image);
    double best = -1.0;
    for (int d = 0; d < 2; ++d) {
        const double s = gradient_sum(p, d);
        if (!(s > 0.0)) continue;
        // filter_axis axis 1 runs along columns, i.e. the horizontal direction d = 0.
        const detail::Plane blurred = detail::uniform_filter_axis(p, k, d == 0 ? 1 : 0);
        const double loss = positive_loss(p, blurred, d);
        best = std::max(best, (s - loss) / s);
    }
    if (best < 0.0) throw DegenerateError("BE is undefined for a constant image (no gradient)");
    return best;
}

BlurRatio blur_ratio_mean_blur(const ImageGrid& image, double t_ib, const DataRangeMode& mode) {
    check_image(image, "BR");
    if (!(t_ib > 0.0)) throw InvalidArgument("BR threshold must be positive");
    const double L = resolve_data_range(mode, image);
    const double scale = 255.0 / L;
    const std::size_t w = image.width(), h = image.height();
    const EdgeMap edges = gradient_edges(image);

    auto value = [&](long r, long c) {
        r = std::clamp(r, 0L, static_cast<long>(h) - 1);
        c = std::clamp(c, 0L, static_cast<long>(w) - 1);
        return image(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) * scale;
    };
    auto inverse_blurriness = [](double v, double a, double b) {
        const double avg = std::abs(a + b) / 2.0;
        const double diff = std::abs(v - avg);
        if (diff == 0.0) return 0.0;
        if (avg == 0.0) return std::numeric_limits<double>::infinity();
        return diff / avg;
    };

    std::size_t edge_count = 0, blurred = 0;
    double ib_sum = 0.0;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            if (!edges.any(r, c)) continue;
            ++edge_count;
            const long lr = static_cast<long>(r), lc = static_cast<long>(c);
            const double v = value(lr, lc);
            const double ib_x = inverse_blurriness(v, value(lr, lc - 1), value(lr, lc + 1));
            const double ib_y = inverse_blurriness(v, value(lr - 1, lc), value(lr + 1, lc));
            const double ib = std::max(ib_x, ib_y);
            if (ib < t_ib) {
                ++blurred;
                ib_sum += ib;
            }
        }
    }
    if (edge_count == 0) throw DegenerateError("BR is undefined: the image has no edge pixels");
    BlurRatio out;
    out.br = static_cast<double>(blurred) / static_cast<double>(edge_count);
    out.mb = blurred > 0 ? ib_sum / static_cast<double>(blurred) : 0.0;
    return out;
}

double variance_of_laplacian(const ImageGrid& image) {
    check_image(image, "VL");
    const long w = static_cast<long>(image.width()), h = static_cast<long>(image.height());
    std::vector<double> lap(image.size());
    for (long r = 0; r < h; ++r) {
        const std::size_t up = detail::reflect_index(r - 1, h), down = detail::reflect_index(r + 1, h);
        for (long c = 0; c < w; ++c) {
            const std::size_t left = detail::reflect_index(c - 1, w), right = detail::reflect_index(c + 1, w);
            const auto rr = static_cast<std::size_t>(r), cc = static_cast<std::size_t>(c);
            lap[rr * w + cc] = image(up, cc) + image(down, cc) + image(rr, left) + image(rr, right) - 4.0 * image(rr, cc);
        }
    }
    const double m = mean_of(lap);
    double ss = 0.0;
    for (double v : lap) ss += (v - m) * (v - m);
    return ss / static_cast<double>(lap.size());
}

double mlc(const ImageGrid& image) { return line_metric(image, 1, 1, "MLC"); }

double mslc(const ImageGrid& image) {
    return line_metric(image, std::max<std::size_t>(1, image.width() / 2), std::max<std::size_t>(1, image.height() / 2),
                       "MSLC");
}

double mtv(const ImageGrid& image) {
    check_image(image, "MTV");
    const std::size_t w = image.width(), h = image.height();
    double s = 0.0;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double dr = r + 1 < h ? image(r, c) - image(r + 1, c) : 0.0;
            const double dc = c + 1 < w ? image(r, c) - image(r, c + 1) : 0.0;
            s += std::sqrt(dr * dr + dc * dc);
        }
    }
    return s / static_cast<double>(image.size());
}

} // namespace mrqm
