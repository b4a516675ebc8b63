#include "mrqm/ref_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filters.hpp"
#include "mrqm/error.hpp"
#include "mrqm/normalize.hpp"

namespace mrqm {

using detail::Plane;

namespace {

void check_pair(const ImageGrid& a, const ImageGrid& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("metric input is empty");
    if (!a.same_shape(b)) {
        throw InvalidArgument("image dimensions differ: " + std::to_string(a.width()) + "x" +
                              std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                              std::to_string(b.height()));
    }
}

struct LocalMoments {
    Plane mu_x, mu_y, var_x, var_y, cov;
};

LocalMoments local_moments(const Plane& x, const Plane& y, const std::vector<double>& kernel) {
    LocalMoments m;
    m.mu_x = detail::filter_separable(x, kernel);
    m.mu_y = detail::filter_separable(y, kernel);
    m.var_x = detail::filter_separable(detail::multiply(x, x), kernel);
    m.var_y = detail::filter_separable(detail::multiply(y, y), kernel);
    m.cov = detail::filter_separable(detail::multiply(x, y), kernel);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double mx = m.mu_x.data[i];
        const double my = m.mu_y.data[i];
        m.var_x.data[i] -= mx * mx;
        m.var_y.data[i] -= my * my;
        m.cov.data[i] -= mx * my;
    }
    return m;
}

std::vector<double> ssim_kernel(const SsimParams& p) {
    if (p.window % 2 == 0 || p.window < 3) throw InvalidArgument("SSIM window must be odd and >= 3");
    return detail::gaussian_kernel(p.sigma, p.window / 2);
}

} // namespace

double ssim(const ImageGrid& image, const ImageGrid& reference, const SsimParams& params) {
    check_pair(image, reference);
    const double L = resolve_data_range(params.data_range, image, reference);
    const double c1 = (params.k1 * L) * (params.k1 * L);
    const double c2 = (params.k2 * L) * (params.k2 * L);
    const auto kernel = ssim_kernel(params);
    const auto m = local_moments(Plane(image), Plane(reference), kernel);
    double acc = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double mx = m.mu_x.data[i];
        const double my = m.mu_y.data[i];
        const double num = (2.0 * mx * my + c1) * (2.0 * m.cov.data[i] + c2);
        const double den = (mx * mx + my * my + c1) * (m.var_x.data[i] + m.var_y.data[i] + c2);
        acc += num / den;
    }
    return acc / static_cast<double>(image.size());
}

double ms_ssim(const ImageGrid& image, const ImageGrid& reference, const SsimParams& params) {
    check_pair(image, reference);
    constexpr std::size_t kScales = kMsSsimWeights.size();
    const std::size_t min_side = params.window << (kScales - 1);
    if (std::min(image.width(), image.height()) < min_side) {
        throw InvalidArgument("MS-SSIM needs images of at least " + std::to_string(min_side) + "x" +
                              std::to_string(min_side) + " pixels");
    }
    const double L = resolve_data_range(params.data_range, image, reference);
    const double c1 = (params.k1 * L) * (params.k1 * L);
    const double c2 = (params.k2 * L) * (params.k2 * L);
    const auto kernel = ssim_kernel(params);

    Plane x(image);
    Plane y(reference);
    double score = 1.0;
    for (std::size_t scale = 0; scale < kScales; ++scale) {
        const auto m = local_moments(x, y, kernel);
        const bool last = scale + 1 == kScales;
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v = (2.0 * m.cov.data[i] + c2) / (m.var_x.data[i] + m.var_y.data[i] + c2);
            if (last) {
                const double mx = m.mu_x.data[i];
                const double my = m.mu_y.data[i];
                v *= (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
            }
            acc += v;
        }
        const double mean = std::max(0.0, acc / static_cast<double>(x.size()));
        score *= std::pow(mean, kMsSsimWeights[scale]);
        if (!last) {
            x = detail::downsample2(detail::filter_separable(x, kernel));
            y = detail::downsample2(detail::filter_separable(y, kernel));
        }
    }
    return score;
}

double psnr(const ImageGrid& image, const ImageGrid& reference, const DataRangeMode& mode) {
    check_pair(image, reference);
    const double L = resolve_data_range(mode, image, reference);
    const double e = mse(image, reference);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(L * L / e);
}

double mae(const ImageGrid& image, const ImageGrid& reference) {
    check_pair(image, reference);
    double acc = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i) acc += std::abs(reference.values()[i] - image.values()[i]);
    return acc / static_cast<double>(image.size());
}

double mse(const ImageGrid& image, const ImageGrid& reference) {
    check_pair(image, reference);
    double acc = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double d = reference.values()[i] - image.values()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(image.size());
}

double rmse(const ImageGrid& image, const ImageGrid& reference) { return std::sqrt(mse(image, reference)); }

double nmse(const ImageGrid& image, const ImageGrid& reference) {
    check_pair(image, reference);
    const double sd = sample_std(reference.values());
    if (!(sd > 0.0)) throw DegenerateError("NMSE is undefined for a constant reference (zero standard deviation)");
    return mse(image, reference) / sd;
}

ErrorMetrics error_metrics(const ImageGrid& image, const ImageGrid& reference) {
    ErrorMetrics e;
    e.mae = mae(image, reference);
    e.mse = mse(image, reference);
    e.rmse = std::sqrt(e.mse);
    e.nmse = nmse(image, reference);
    return e;
}

namespace {

struct Entropies {
    double h_i = 0.0;
    double h_r = 0.0;
    double h_joint = 0.0;
};

// Summed in ascending count order so the result does not depend on how the
// histogram is laid out (NMI(I, R) == NMI(R, I) bit for bit).
double entropy(std::vector<std::size_t> counts, double n) {
    std::erase(counts, std::size_t{0});
    std::sort(counts.begin(), counts.end());
    double h = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

Entropies binned_entropies(const ImageGrid& image, const ImageGrid& reference, int bins) {
    check_pair(image, reference);
    const auto bi = binning(image, bins);
    const auto br = binning(reference, bins);
    const auto b = static_cast<std::size_t>(bins);
    std::vector<std::size_t> joint(b * b, 0), hi(b, 0), hr(b, 0);
    for (std::size_t k = 0; k < bi.size(); ++k) {
        const auto i = static_cast<std::size_t>(bi.values()[k]);
        const auto r = static_cast<std::size_t>(br.values()[k]);
        ++joint[i * b + r];
        ++hi[i];
        ++hr[r];
    }
    const double n = static_cast<double>(image.size());
    return {entropy(std::move(hi), n), entropy(std::move(hr), n), entropy(std::move(joint), n)};
}

} // namespace

double mi(const ImageGrid& image, const ImageGrid& reference, int bins) {
    const auto e = binned_entropies(image, reference, bins);
    return std::max(0.0, e.h_i + e.h_r - e.h_joint);
}

double nmi(const ImageGrid& image, const ImageGrid& reference, int bins) {
    const auto e = binned_entropies(image, reference, bins);
    if (e.h_joint == 0.0) return 2.0;
    return (e.h_i + e.h_r) / e.h_joint;
}

double pcc(const ImageGrid& image, const ImageGrid& reference) {
    check_pair(image, reference);
    const double mi_ = mean_of(image.values());
    const double mr = mean_of(reference.values());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double dx = image.values()[i] - mi_;
        const double dy = reference.values()[i] - mr;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw DegenerateError("PCC is undefined for a constant image (zero variance, undefined correlation)");
    }
    return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

double dsc(const LabelMask& a, const LabelMask& b, int class_id, double epsilon) {
    if (a.width() != b.width() || a.height() != b.height()) throw InvalidArgument("label mask dimensions differ");
    if (!(epsilon > 0.0)) throw InvalidArgument("DSC epsilon must be positive");
    auto member = [class_id](std::int32_t label) {
        return class_id == kTotalForeground ? label != 0 : label == class_id;
    };
    double na = 0.0, nb = 0.0, both = 0.0;
    for (std::size_t i = 0; i < a.labels().size(); ++i) {
        const bool in_a = member(a.labels()[i]);
        const bool in_b = member(b.labels()[i]);
        na += in_a;
        nb += in_b;
        both += in_a && in_b;
    }
    return (2.0 * both + epsilon) / (na + nb + epsilon);
}

} // namespace mrqm
