#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "kspace.hpp"
#include "mrqm/distort.hpp"
#include "mrqm/error.hpp"
#include "test_util.hpp"

using namespace mrqm;

namespace {

ImageGrid phantom_small() { return make_phantom(7, 72, 64); }

double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

} // namespace

TEST_CASE("parameter interpolation endpoints") {
    CHECK(interpolate_param(DistortionKind::Translation, 3.0).value == doctest::Approx(0.105));
    CHECK(interpolate_param(DistortionKind::GammaHigh, 1.0).value == doctest::Approx(std::exp(0.095)));
    CHECK(interpolate_param(DistortionKind::GammaLow, 5.0).value == doctest::Approx(std::exp(-0.916)));
    const auto e5 = interpolate_param(DistortionKind::ElasticDeform, 5.0);
    CHECK(e5.grid == 11);
    CHECK(e5.deform == doctest::Approx(0.1));
    CHECK(interpolate_param(DistortionKind::ElasticDeform, 1.0).grid == 18);
    CHECK(interpolate_param(DistortionKind::BiasField, 5.0).value == doctest::Approx(10.0));
    CHECK(interpolate_param(DistortionKind::GaussianBlur, 2.0).value == doctest::Approx(0.475));
    CHECK_THROWS_AS(interpolate_param(DistortionKind::GaussianBlur, 0.5), InvalidArgument);
    CHECK_THROWS_AS(interpolate_param(DistortionKind::GaussianBlur, 5.5), InvalidArgument);
    CHECK_THROWS_AS(interpolate_param(DistortionKind::GaussianBlur, std::nan("")), InvalidArgument);
}

TEST_CASE("parameters are monotone in strength") {
    for (DistortionKind k : kAllDistortions) {
        if (k == DistortionKind::ElasticDeform) continue;
        const double a = interpolate_param(k, 1.0).value;
        const double b = interpolate_param(k, 5.0).value;
        for (double s = 1.0; s < 5.0; s += 0.25) {
            const double x = interpolate_param(k, s).value;
            const double y = interpolate_param(k, s + 0.25).value;
            CHECK((b > a ? y >= x : y <= x));
        }
    }
}

TEST_CASE("names round trip") {
    for (DistortionKind k : kAllDistortions) CHECK(parse_distortion(distortion_name(k)) == k);
    CHECK(parse_distortion("gaussian-blur") == DistortionKind::GaussianBlur);
    CHECK(parse_distortion("GAUSSIAN_NOISE") == DistortionKind::GaussianNoise);
    CHECK_THROWS_AS(parse_distortion("motion"), InvalidArgument);
}

TEST_CASE("shift intensity adds a fraction of the range") {
    std::vector<double> v(100);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) * 1000.0 / 99.0;
    const ImageGrid img(10, 10, v);
    const auto out = apply_distortion(img, {DistortionKind::ShiftIntensity, 5.0, 0});
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(out.values()[i] - v[i] == doctest::Approx(250.0));
}

TEST_CASE("gamma preserves the extrema") {
    std::mt19937_64 gen(3);
    for (int t = 0; t < 20; ++t) {
        const auto img = testutil::random_image(gen, 12, 9, -50, 400);
        for (DistortionKind k : {DistortionKind::GammaHigh, DistortionKind::GammaLow}) {
            const auto out = apply_distortion(img, {k, 1.0 + t * 0.2, 0});
            const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
            const auto [olo, ohi] = std::minmax_element(out.values().begin(), out.values().end());
            CHECK(std::abs(*olo - *lo) < 1e-9);
            CHECK(std::abs(*ohi - *hi) < 1e-9);
        }
    }
    const ImageGrid flat(4, 4, std::vector<double>(16, 5.0));
    CHECK(max_abs_diff(apply_distortion(flat, {DistortionKind::GammaLow, 3.0, 0}), flat) == 0.0);
}

TEST_CASE("gamma direction") {
    const auto img = phantom_small();
    const auto hi = apply_distortion(img, {DistortionKind::GammaHigh, 5.0, 0});
    const auto lo = apply_distortion(img, {DistortionKind::GammaLow, 5.0, 0});
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(hi.values()[i] <= img.values()[i] + 1e-9);
        CHECK(lo.values()[i] >= img.values()[i] - 1e-9);
    }
}

TEST_CASE("replace leaves the left half untouched") {
    const auto img = phantom_small();
    for (double s : {1.0, 3.0, 5.0}) {
        const auto out = apply_distortion(img, {DistortionKind::ReplaceArtifact, s, 0});
        const double f = interpolate_param(DistortionKind::ReplaceArtifact, s).value;
        for (std::size_t r = 0; r < img.height(); ++r) {
            for (std::size_t c = 0; c < img.width(); ++c) {
                const double x = static_cast<double>(c);
                const double w = static_cast<double>(img.width());
                if (x <= w / 2 || x > w * (1 + f) / 2) {
                    CHECK(out(r, c) == img(r, c));
                } else {
                    CHECK(out(r, c) == img(r, img.width() - c));
                }
            }
        }
    }
}

TEST_CASE("translation moves content and zero fills") {
    std::mt19937_64 gen(5);
    const auto img = testutil::random_image(gen, 40, 20, 1, 10);
    const auto out = apply_distortion(img, {DistortionKind::Translation, 5.0, 0});
    const long dr = std::lround(0.2 * 20), dc = std::lround(0.2 * 40);
    for (long r = 0; r < 20; ++r) {
        for (long c = 0; c < 40; ++c) {
            const bool inside = r + dr < 20 && c + dc < 40;
            CHECK(out(r, c) == (inside ? img(r + dr, c + dc) : 0.0));
        }
    }
    // Strength 1 on a tiny image rounds to no shift.
    const auto tiny = testutil::random_image(gen, 8, 8, 1, 10);
    CHECK(max_abs_diff(apply_distortion(tiny, {DistortionKind::Translation, 1.0, 0}), tiny) == 0.0);
}

TEST_CASE("bias field is a smooth multiplicative field fixed on the border") {
    const ImageGrid ones(30, 20, std::vector<double>(600, 1.0));
    const auto out = apply_distortion(ones, {DistortionKind::BiasField, 5.0, 0});
    for (std::size_t c = 0; c < 30; ++c) {
        CHECK(out(0, c) == doctest::Approx(1.0));
        CHECK(out(19, c) == doctest::Approx(1.0));
    }
    for (std::size_t r = 0; r < 20; ++r) CHECK(out(r, 15) == doctest::Approx(1.0).epsilon(0.05));
    const double x1 = 10.0 / 19.0, x2 = 5.0 / 29.0;
    const double p3 = 10.0 * x1 * x1 * (x1 - 1) * (x2 - 0.5) * x2 * (x2 - 1);
    CHECK(out(10, 5) == doctest::Approx(std::exp(10.0 * p3)));
}

TEST_CASE("blur reduces variation and keeps the mean") {
    const auto img = phantom_small();
    const auto out = apply_distortion(img, {DistortionKind::GaussianBlur, 5.0, 0});
    double tv_in = 0.0, tv_out = 0.0;
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 1; c < img.width(); ++c) {
            tv_in += std::abs(img(r, c) - img(r, c - 1));
            tv_out += std::abs(out(r, c) - out(r, c - 1));
        }
    }
    CHECK(tv_out < tv_in);
    CHECK(mean_of(out.values()) == doctest::Approx(mean_of(img.values())).epsilon(1e-9));
}

TEST_CASE("noise level follows the range") {
    const auto img = make_phantom(3, 128, 128);
    const auto out = apply_distortion(img, {DistortionKind::GaussianNoise, 5.0, 99});
    std::vector<double> d(img.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = out.values()[i] - img.values()[i];
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    CHECK(population_std(d) == doctest::Approx(0.05 * (*hi - *lo)).epsilon(0.03));
    CHECK(std::abs(mean_of(d)) < 0.002 * (*hi - *lo));
}

TEST_CASE("k-space edits stay real") {
    for (auto [w, h] : {std::pair{72, 64}, std::pair{65, 67}, std::pair{80, 71}}) {
        const auto img = make_phantom(11, w, h);
        const double peak = *std::max_element(img.values().begin(), img.values().end());
        for (double i : {0.05, 0.2, 0.5}) {
            for (const auto& data : {detail::ghosting_complex(img, i), detail::stripe_complex(img, i)}) {
                double resid = 0.0;
                for (const auto& z : data) resid = std::max(resid, std::abs(z.imag()));
                CHECK(resid < 1e-8 * peak);
            }
        }
    }
}

TEST_CASE("ghosting keeps the centre line and attenuates the rest") {
    const auto img = phantom_small();
    const auto zero = detail::ghosting_complex(img, 0.0);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(zero[i].real() - img.values()[i]) < 1e-8);
    const auto out = apply_distortion(img, {DistortionKind::Ghosting, 5.0, 0});
    CHECK(max_abs_diff(out, img) > 0.0);
}

TEST_CASE("stripe adds a pure tone") {
    const auto img = phantom_small();
    const auto out = apply_distortion(img, {DistortionKind::StripeArtifact, 3.0, 0});
    std::vector<double> d(img.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = out.values()[i] - img.values()[i];
    // A Nyquist tone along the columns alternates sign between neighbours.
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 1; c < img.width(); ++c) {
            CHECK(d[r * img.width() + c] == doctest::Approx(-d[r * img.width() + c - 1]).epsilon(1e-6));
        }
    }
}

TEST_CASE("elastic deformation is bounded and deterministic") {
    const auto img = phantom_small();
    const auto a = apply_distortion(img, {DistortionKind::ElasticDeform, 5.0, 42});
    const auto b = apply_distortion(img, {DistortionKind::ElasticDeform, 5.0, 42});
    const auto c = apply_distortion(img, {DistortionKind::ElasticDeform, 5.0, 43});
    CHECK(max_abs_diff(a, b) == 0.0);
    CHECK(max_abs_diff(a, c) > 0.0);
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    for (double v : a.values()) CHECK((v >= *lo - 1e-9 && v <= *hi + 1e-9));
    for (std::size_t col = 0; col < img.width(); ++col) CHECK(a(0, col) == doctest::Approx(img(0, col)));
}

TEST_CASE("every kind is deterministic for a fixed seed") {
    const auto img = phantom_small();
    for (DistortionKind k : kAllDistortions) {
        const auto a = apply_distortion(img, {k, 4.0, 17});
        const auto b = apply_distortion(img, {k, 4.0, 17});
        CHECK(max_abs_diff(a, b) == 0.0);
        CHECK(a.same_shape(img));
    }
}

TEST_CASE("sweep layout and seeds") {
    const auto img = phantom_small();
    const std::vector<double> strengths{1, 2, 3, 4, 5};
    const auto items = sweep(img, kAllDistortions, strengths, 2024);
    REQUIRE(items.size() == 55);
    for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(items[i].spec.kind == kAllDistortions[i / 5]);
        CHECK(items[i].spec.strength == strengths[i % 5]);
        CHECK(items[i].spec.seed == sweep_seed(2024, kAllDistortions[i / 5], i % 5));
    }
    const auto again = sweep(img, kAllDistortions, strengths, 2024);
    for (std::size_t i = 0; i < items.size(); ++i) CHECK(max_abs_diff(items[i].image, again[i].image) == 0.0);
    CHECK(sweep(img, kAllDistortions, std::vector<double>{}, 1).empty());
    CHECK_THROWS_AS(sweep(img, kAllDistortions, std::vector<double>{6.0}, 1), InvalidArgument);
}
