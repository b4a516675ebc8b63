#include "mrqm/distort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "filters.hpp"
#include "kspace.hpp"
#include "mrqm/error.hpp"
#include "random.hpp"

namespace mrqm {

namespace {

struct Endpoints {
    double s1;
    double s5;
};

// Parameter values at strength 1 and strength 5.
constexpr Endpoints kBiasC{0.5, 10.0};
constexpr Endpoints kElasticN{18.0, 11.0};
constexpr Endpoints kElasticD{0.03, 0.1};
constexpr Endpoints kGammaLowLog{-0.01, -0.916};
constexpr Endpoints kGammaHighLog{0.095, 0.916};
constexpr Endpoints kBlurSigma{0.2, 1.3};
constexpr Endpoints kNoiseSigma{0.005, 0.05};
constexpr Endpoints kGhostI{0.05, 0.4};
constexpr Endpoints kReplaceF{0.1, 1.0};
constexpr Endpoints kShiftF{0.05, 0.25};
constexpr Endpoints kStripeI{0.05, 0.5};
constexpr Endpoints kTranslationF{0.01, 0.2};

double lerp(Endpoints e, double s) { return e.s1 + (s - 1.0) / 4.0 * (e.s5 - e.s1); }

std::string fold(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::pair<double, double> extrema(const ImageGrid& image) {
    const auto [lo, hi] = std::minmax_element(image.values().begin(), image.values().end());
    return {*lo, *hi};
}

ImageGrid bias_field(const ImageGrid& image, double c) {
    const std::size_t w = image.width(), h = image.height();
    std::vector<double> out(image.size());
    for (std::size_t r = 0; r < h; ++r) {
        const double x1 = h > 1 ? static_cast<double>(r) / static_cast<double>(h - 1) : 0.0;
        for (std::size_t col = 0; col < w; ++col) {
            const double x2 = w > 1 ? static_cast<double>(col) / static_cast<double>(w - 1) : 0.0;
            const double p3 = 10.0 * x1 * x1 * (x1 - 1.0) * (x2 - 0.5) * x2 * (x2 - 1.0);
            out[r * w + col] = image(r, col) * std::exp(c * p3);
        }
    }
    return image.with_values(std::move(out));
}

ImageGrid real_part(const ImageGrid& image, const std::vector<detail::Complex>& data) {
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
    return image.with_values(std::move(out));
}

ImageGrid gamma(const ImageGrid& image, double g) {
    const auto [lo, hi] = extrema(image);
    if (!(hi > lo)) return image;
    std::vector<double> out(image.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = (image.values()[i] - lo) / (hi - lo);
        out[i] = lo + std::pow(t, g) * (hi - lo);
    }
    return image.with_values(std::move(out));
}

ImageGrid gaussian_noise(const ImageGrid& image, double sigma, std::uint64_t seed) {
    const auto [lo, hi] = extrema(image);
    const double sd = sigma * (hi - lo);
    detail::Rng rng(seed);
    std::vector<double> out(image.values().begin(), image.values().end());
    for (double& v : out) v += rng.normal(0.0, sd);
    return image.with_values(std::move(out));
}

ImageGrid replace_artifact(const ImageGrid& image, double f) {
    const std::size_t w = image.width(), h = image.height();
    const double half = static_cast<double>(w) / 2.0;
    const double limit = static_cast<double>(w) * (1.0 + f) / 2.0;
    std::vector<double> out(image.values().begin(), image.values().end());
    for (std::size_t c = 0; c < w; ++c) {
        const double x2 = static_cast<double>(c);
        if (x2 <= half || x2 > limit) continue;
        const std::size_t src = w - c;
        for (std::size_t r = 0; r < h; ++r) out[r * w + c] = image(r, src);
    }
    return image.with_values(std::move(out));
}

ImageGrid shift_intensity(const ImageGrid& image, double f) {
    const auto [lo, hi] = extrema(image);
    const double offset = f * (hi - lo);
    std::vector<double> out(image.values().begin(), image.values().end());
    for (double& v : out) v += offset;
    return image.with_values(std::move(out));
}

ImageGrid translation(const ImageGrid& image, double f) {
    const long w = static_cast<long>(image.width()), h = static_cast<long>(image.height());
    const long dr = std::lround(f * static_cast<double>(h));
    const long dc = std::lround(f * static_cast<double>(w));
    std::vector<double> out(image.size(), 0.0);
    for (long r = 0; r < h; ++r) {
        const long sr = r + dr;
        if (sr < 0 || sr >= h) continue;
        for (long c = 0; c < w; ++c) {
            const long sc = c + dc;
            if (sc >= 0 && sc < w) out[r * w + c] = image(sr, sc);
        }
    }
    return image.with_values(std::move(out));
}

double bilinear(const ImageGrid& image, double y, double x) {
    const double h = static_cast<double>(image.height() - 1);
    const double w = static_cast<double>(image.width() - 1);
    y = std::clamp(y, 0.0, h);
    x = std::clamp(x, 0.0, w);
    const auto r0 = static_cast<std::size_t>(std::floor(y));
    const auto c0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t r1 = std::min(r0 + 1, image.height() - 1);
    const std::size_t c1 = std::min(c0 + 1, image.width() - 1);
    const double fy = y - static_cast<double>(r0);
    const double fx = x - static_cast<double>(c0);
    return (1 - fy) * ((1 - fx) * image(r0, c0) + fx * image(r0, c1)) + fy * ((1 - fx) * image(r1, c0) + fx * image(r1, c1));
}

ImageGrid elastic(const ImageGrid& image, int n, double d, std::uint64_t seed) {
    const std::size_t w = image.width(), h = image.height();
    detail::Rng rng(seed);
    const auto grid = static_cast<std::size_t>(n);
    // Control displacements in pixels; border points stay fixed.
    std::vector<double> disp_r(grid * grid, 0.0), disp_c(grid * grid, 0.0);
    const double sd_r = d * static_cast<double>(h) / n;
    const double sd_c = d * static_cast<double>(w) / n;
    for (std::size_t i = 1; i + 1 < grid; ++i) {
        for (std::size_t j = 1; j + 1 < grid; ++j) {
            disp_r[i * grid + j] = rng.normal(0.0, sd_r);
            disp_c[i * grid + j] = rng.normal(0.0, sd_c);
        }
    }
    const double step_r = static_cast<double>(h - 1) / static_cast<double>(grid - 1);
    const double step_c = static_cast<double>(w - 1) / static_cast<double>(grid - 1);
    auto field = [&](const std::vector<double>& g, double gy, double gx) {
        const auto i0 = std::min(static_cast<std::size_t>(gy), grid - 2);
        const auto j0 = std::min(static_cast<std::size_t>(gx), grid - 2);
        const double ty = gy - static_cast<double>(i0);
        const double tx = gx - static_cast<double>(j0);
        return (1 - ty) * ((1 - tx) * g[i0 * grid + j0] + tx * g[i0 * grid + j0 + 1]) +
               ty * ((1 - tx) * g[(i0 + 1) * grid + j0] + tx * g[(i0 + 1) * grid + j0 + 1]);
    };
    std::vector<double> out(image.size());
    for (std::size_t r = 0; r < h; ++r) {
        const double gy = static_cast<double>(r) / step_r;
        for (std::size_t c = 0; c < w; ++c) {
            const double gx = static_cast<double>(c) / step_c;
            out[r * w + c] = bilinear(image, static_cast<double>(r) + field(disp_r, gy, gx),
                                      static_cast<double>(c) + field(disp_c, gy, gx));
        }
    }
    return image.with_values(std::move(out));
}

std::vector<detail::Complex> centered_spectrum(const ImageGrid& image) {
    std::vector<detail::Complex> data(image.values().begin(), image.values().end());
    detail::fft2(data, image.width(), image.height(), false);
    return detail::fftshift(data, image.width(), image.height());
}

std::vector<detail::Complex> back_to_space(const std::vector<detail::Complex>& centered, std::size_t w, std::size_t h) {
    auto data = detail::ifftshift(centered, w, h);
    detail::fft2(data, w, h, true);
    return data;
}

void check_strength(double strength) {
    if (!(strength >= 1.0 && strength <= 5.0)) {
        throw InvalidArgument("distortion strength must lie in [1, 5], got " + format_double(strength));
    }
}

} // namespace

namespace detail {

std::vector<Complex> ghosting_complex(const ImageGrid& image, double intensity) {
    const std::size_t w = image.width(), h = image.height();
    auto spec = centered_spectrum(image);
    const std::size_t center = h / 2;
    const std::vector<Complex> kept(spec.begin() + center * w, spec.begin() + (center + 1) * w);
    for (std::size_t r = 0; r < h; r += 2)
        for (std::size_t c = 0; c < w; ++c) spec[r * w + c] *= 1.0 - intensity;
    std::copy(kept.begin(), kept.end(), spec.begin() + center * w);
    return back_to_space(spec, w, h);
}

std::vector<Complex> stripe_complex(const ImageGrid& image, double intensity) {
    const std::size_t w = image.width(), h = image.height();
    auto spec = centered_spectrum(image);
    double peak = 0.0;
    for (const auto& v : spec) peak = std::max(peak, std::abs(v));
    // Spike at fractional array position (0.3 cos 0, 0.3 sin 0) of the centred
    // spectrum, with its Hermitian partner so the image stays real.
    const auto pr = static_cast<std::size_t>(std::floor(0.3 * std::cos(0.0) * static_cast<double>(h)));
    const auto pc = static_cast<std::size_t>(std::floor(0.3 * std::sin(0.0) * static_cast<double>(w)));
    const std::size_t qr = (2 * (h / 2) + h - pr) % h;
    const std::size_t qc = (2 * (w / 2) + w - pc) % w;
    const Complex value(intensity * peak, 0.0);
    spec[pr * w + pc] = value;
    spec[qr * w + qc] = std::conj(value);
    return back_to_space(spec, w, h);
}

} // namespace detail

std::string_view distortion_name(DistortionKind kind) {
    switch (kind) {
    case DistortionKind::BiasField:
        return "BiasField";
    case DistortionKind::Ghosting:
        return "Ghosting";
    case DistortionKind::StripeArtifact:
        return "StripeArtifact";
    case DistortionKind::GaussianBlur:
        return "GaussianBlur";
    case DistortionKind::GaussianNoise:
        return "GaussianNoise";
    case DistortionKind::ReplaceArtifact:
        return "ReplaceArtifact";
    case DistortionKind::GammaHigh:
        return "GammaHigh";
    case DistortionKind::GammaLow:
        return "GammaLow";
    case DistortionKind::ShiftIntensity:
        return "ShiftIntensity";
    case DistortionKind::Translation:
        return "Translation";
    case DistortionKind::ElasticDeform:
        return "ElasticDeform";
    }
    return "unknown";
}

DistortionKind parse_distortion(std::string_view name) {
    const std::string key = fold(name);
    for (DistortionKind k : kAllDistortions) {
        if (fold(distortion_name(k)) == key) return k;
    }
    throw InvalidArgument("unknown distortion '" + std::string(name) + "'");
}

DistortionParams interpolate_param(DistortionKind kind, double strength) {
    check_strength(strength);
    DistortionParams p;
    switch (kind) {
    case DistortionKind::BiasField:
        p.value = lerp(kBiasC, strength);
        break;
    case DistortionKind::Ghosting:
        p.value = lerp(kGhostI, strength);
        break;
    case DistortionKind::StripeArtifact:
        p.value = lerp(kStripeI, strength);
        break;
    case DistortionKind::GaussianBlur:
        p.value = lerp(kBlurSigma, strength);
        break;
    case DistortionKind::GaussianNoise:
        p.value = lerp(kNoiseSigma, strength);
        break;
    case DistortionKind::ReplaceArtifact:
        p.value = lerp(kReplaceF, strength);
        break;
    case DistortionKind::GammaHigh:
        p.value = std::exp(lerp(kGammaHighLog, strength));
        break;
    case DistortionKind::GammaLow:
        p.value = std::exp(lerp(kGammaLowLog, strength));
        break;
    case DistortionKind::ShiftIntensity:
        p.value = lerp(kShiftF, strength);
        break;
    case DistortionKind::Translation:
        p.value = lerp(kTranslationF, strength);
        break;
    case DistortionKind::ElasticDeform:
        p.grid = static_cast<int>(std::lround(lerp(kElasticN, strength)));
        p.deform = lerp(kElasticD, strength);
        break;
    }
    return p;
}

ImageGrid apply_distortion(const ImageGrid& image, const DistortionSpec& spec) {
    if (image.empty()) throw InvalidArgument("cannot distort an empty image");
    const DistortionParams p = interpolate_param(spec.kind, spec.strength);
    switch (spec.kind) {
    case DistortionKind::BiasField:
        return bias_field(image, p.value);
    case DistortionKind::Ghosting:
        return real_part(image, detail::ghosting_complex(image, p.value));
    case DistortionKind::StripeArtifact:
        return real_part(image, detail::stripe_complex(image, p.value));
    case DistortionKind::GaussianBlur: {
        const detail::Plane out = detail::gaussian_filter(detail::Plane(image), p.value);
        return image.with_values(out.data);
    }
    case DistortionKind::GaussianNoise:
        return gaussian_noise(image, p.value, spec.seed);
    case DistortionKind::ReplaceArtifact:
        return replace_artifact(image, p.value);
    case DistortionKind::GammaHigh:
    case DistortionKind::GammaLow:
        return gamma(image, p.value);
    case DistortionKind::ShiftIntensity:
        return shift_intensity(image, p.value);
    case DistortionKind::Translation:
        return translation(image, p.value);
    case DistortionKind::ElasticDeform:
        if (image.width() < 2 || image.height() < 2) throw InvalidArgument("elastic deformation needs a 2x2 image");
        return elastic(image, p.grid, p.deform, spec.seed);
    }
    throw InvalidArgument("unknown distortion kind");
}

std::uint64_t sweep_seed(std::uint64_t master, DistortionKind kind, std::size_t strength_index) {
    const auto kind_index = static_cast<std::uint64_t>(kind);
    return master ^ detail::mix64(kind_index << 8 | static_cast<std::uint64_t>(strength_index));
}

std::vector<SweepItem> sweep(const ImageGrid& image, std::span<const DistortionKind> kinds,
                             std::span<const double> strengths, std::uint64_t seed) {
    for (double s : strengths) check_strength(s);
    std::vector<SweepItem> out;
    out.reserve(kinds.size() * strengths.size());
    for (DistortionKind kind : kinds) {
        for (std::size_t si = 0; si < strengths.size(); ++si) {
            const DistortionSpec spec{kind, strengths[si], sweep_seed(seed, kind, si)};
            out.push_back({spec, apply_distortion(image, spec)});
        }
    }
    return out;
}

} // namespace mrqm
