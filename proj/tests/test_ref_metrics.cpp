#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mrqm/distort.hpp"
#include "mrqm/error.hpp"
#include "mrqm/normalize.hpp"
#include "mrqm/ref_metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mrqm;

namespace {

ImageGrid affine(const ImageGrid& img, double a, double b) {
    std::vector<double> v(img.values().begin(), img.values().end());
    for (double& x : v) x = a * x + b;
    return img.with_values(v);
}

ImageGrid noisy(const ImageGrid& img, double sd, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, sd);
    std::vector<double> v(img.values().begin(), img.values().end());
    for (double& x : v) x += n(gen);
    return img.with_values(v);
}

} // namespace

TEST_CASE("SSIM identity and oracle") {
    std::mt19937_64 gen(21);
    for (int t = 0; t < 100; ++t) {
        const auto a = testutil::random_image(gen, 16, 16, 0, 100);
        const auto b = testutil::random_image(gen, 16, 16, -20, 80);
        CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        const double L = resolve_data_range(DataRangeMode::pair(), a, b);
        CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b, L)) < 1e-9);
    }
}

TEST_CASE("SSIM scales jointly with the data range") {
    std::mt19937_64 gen(22);
    for (int t = 0; t < 20; ++t) {
        const auto a = testutil::random_image(gen, 24, 20, 0, 1000);
        const auto b = noisy(a, 100.0, t);
        const double L = resolve_data_range(DataRangeMode::pair(), a, b);
        for (double s : {0.001, 3.0, 250.0}) {
            SsimParams p;
            p.data_range = DataRangeMode::fixed(L);
            const double base = ssim(a, b, p);
            p.data_range = DataRangeMode::fixed(s * L);
            CHECK(std::abs(ssim(affine(a, s, 0), affine(b, s, 0), p) - base) < 1e-9);
        }
    }
}

TEST_CASE("SSIM symmetry depends on the data range mode") {
    std::mt19937_64 gen(23);
    const auto a = testutil::random_image(gen, 20, 20, 0, 100);
    const auto b = testutil::random_image(gen, 20, 20, 0, 300);
    CHECK(ssim(a, b) == ssim(b, a));
    SsimParams p;
    p.data_range = DataRangeMode::per_image();
    CHECK(ssim(a, b, p) != ssim(b, a, p));
}

TEST_CASE("SSIM errors") {
    CHECK_THROWS_AS(ssim(ImageGrid::filled(4, 4, 1), ImageGrid::filled(4, 5, 1)), InvalidArgument);
    CHECK_THROWS_AS(ssim(ImageGrid::filled(4, 4, 1), ImageGrid::filled(4, 4, 1)), DegenerateError);
}

TEST_CASE("MS-SSIM") {
    const auto img = make_phantom(3, 176, 176);
    CHECK(ms_ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
    const auto other = noisy(img, 500.0, 1);
    const double v = ms_ssim(other, img);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK_THROWS_AS(ms_ssim(make_phantom(3, 175, 175), make_phantom(3, 175, 175)), InvalidArgument);
    try {
        ms_ssim(make_phantom(3, 200, 175), make_phantom(3, 200, 175));
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("176") != std::string::npos);
    }
}

TEST_CASE("CW-SSIM") {
    const auto img = make_phantom(4, 96, 96);
    CHECK(cw_ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
    // Rescaling either input to [0, 255] happens internally.
    CHECK(cw_ssim(affine(img, 3.0, 7.0), img) == doctest::Approx(1.0).epsilon(1e-12));
    // The coefficient-magnitude formula cannot tell a negated image apart.
    CHECK(cw_ssim(affine(img, -1.0, 0.0), img) == doctest::Approx(1.0).epsilon(1e-9));
    std::mt19937_64 gen(1);
    const auto noise = testutil::random_image(gen, 96, 96, 0, 1);
    CHECK(cw_ssim(noise, img) < 0.5);
    CHECK(cw_ssim(noise, img) >= 0.0);
    CHECK_THROWS_AS(cw_ssim(make_phantom(4, 64, 64), make_phantom(4, 64, 65)), InvalidArgument);
    const ImageGrid tiny(16, 16, std::vector<double>(256, 1.0));
    CHECK_THROWS_AS(cw_ssim(tiny, tiny), InvalidArgument);
    std::mt19937_64 gen2(2);
    const auto edge = testutil::random_image(gen2, 32, 32, 0, 1);
    CHECK(cw_ssim(edge, edge) == doctest::Approx(1.0));
    const auto below = testutil::random_image(gen2, 31, 40, 0, 1);
    CHECK_THROWS_AS(cw_ssim(below, below), InvalidArgument);
}

TEST_CASE("CW-SSIM tolerates a two pixel shift better than SSIM") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const auto img = make_phantom(seed);
        const auto moved = apply_distortion(img, {DistortionKind::Translation, 1.0, 0});
        const double s = ssim(moved, img);
        const double c = cw_ssim(moved, img);
        CHECK(s < 0.90);
        CHECK(c >= s + 0.10);
        CHECK(c > 0.85);
    }
}

TEST_CASE("PSNR") {
    std::mt19937_64 gen(24);
    const auto a = testutil::random_image(gen, 8, 8, 0, 255);
    CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
    // MSE = 255^2 with L = 255.
    const auto zero = ImageGrid::filled(4, 4, 0.0);
    const auto full = ImageGrid::filled(4, 4, 255.0);
    CHECK(psnr(zero, full, DataRangeMode::fixed(255.0)) == doctest::Approx(0.0));
    for (int t = 0; t < 50; ++t) {
        const auto x = testutil::random_image(gen, 10, 10, 0, 100);
        const auto y = testutil::random_image(gen, 10, 10, 0, 100);
        const double L = resolve_data_range(DataRangeMode::pair(), x, y);
        CHECK(std::abs(psnr(x, y) - (20 * std::log10(L) - 10 * std::log10(mse(x, y)))) < 1e-12);
        CHECK(std::abs(psnr(affine(x, 4.0, 0), affine(y, 4.0, 0)) - psnr(x, y)) < 1e-9);
    }
}

TEST_CASE("error metrics") {
    std::mt19937_64 gen(25);
    for (int t = 0; t < 100; ++t) {
        const auto a = testutil::random_image(gen, 16, 16, -50, 50);
        const auto b = testutil::random_image(gen, 16, 16, -50, 50);
        const auto e = error_metrics(a, b);
        CHECK(std::abs(e.mse - oracle::mse(a, b)) <= 1e-9 * oracle::mse(a, b));
        CHECK(std::abs(e.mae - oracle::mae(a, b)) <= 1e-9 * oracle::mae(a, b));
        CHECK(std::abs(e.rmse - std::sqrt(oracle::mse(a, b))) <= 1e-9 * e.rmse);
        CHECK(std::abs(e.nmse - oracle::nmse(a, b)) <= 1e-9 * e.nmse);
        CHECK(mse(a, b) == mse(b, a));
        CHECK(mae(a, b) == mae(b, a));
    }
    const auto a = testutil::random_image(gen, 4, 4, 0, 10);
    const auto z = error_metrics(a, a);
    CHECK(z.mae == 0.0);
    CHECK(z.mse == 0.0);
    CHECK(z.rmse == 0.0);
    CHECK(z.nmse == 0.0);
    const auto shifted = ImageGrid(2, 2, {1.5, 2.5, 3.5, 4.5});
    const auto base = ImageGrid(2, 2, {1, 2, 3, 4});
    CHECK(mae(shifted, base) == 0.5);
    CHECK(mse(shifted, base) == 0.25);
    CHECK(rmse(shifted, base) == 0.5);
    CHECK_THROWS_AS(nmse(a, ImageGrid::filled(4, 4, 2.0)), DegenerateError);
}

TEST_CASE("4x4 error metrics against a hand-written sum") {
    const ImageGrid i(4, 4, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16});
    const ImageGrid r(4, 4, {2, 2, 1, 4, 5, 9, 7, 8, 9, 0, 11, 12, 13, 14, 15, 20});
    // differences: 1,0,-2,0,0,3,0,0,0,-10,0,0,0,0,0,4
    CHECK(mae(i, r) == 20.0 / 16.0);
    CHECK(mse(i, r) == 130.0 / 16.0);
}

TEST_CASE("NMI and MI") {
    std::mt19937_64 gen(26);
    for (int t = 0; t < 100; ++t) {
        const auto a = testutil::random_image(gen, 16, 16, 0, 1000);
        const auto b = testutil::random_image(gen, 16, 16, 0, 1000);
        CHECK(std::abs(nmi(a, b) - oracle::nmi(a, b, 256)) < 1e-9);
        CHECK(std::abs(mi(a, b, 16) - oracle::mi(a, b, 16)) < 1e-9);
        CHECK(nmi(a, b) == nmi(b, a));
        CHECK(nmi(a, a) == 2.0);
        CHECK(nmi(a, b) >= 1.0);
        CHECK(nmi(a, b) <= 2.0);
    }
    CHECK(nmi(ImageGrid::filled(3, 3, 1), ImageGrid::filled(3, 3, 5)) == 2.0);
}

TEST_CASE("NMI on an 8x8 pair with 4 bins") {
    // Left half 0, right half 1 in I; R has the top 2 rows set to 3.
    std::vector<double> i(64), r(64);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            i[y * 8 + x] = x < 4 ? 0 : 3;
            r[y * 8 + x] = y < 2 ? 3 : 0;
        }
    const ImageGrid a(8, 8, i), b(8, 8, r);
    // Marginals: I {1/2, 1/2}; R {1/4, 3/4}; joint {1/8, 1/8, 3/8, 3/8} (independent).
    const double hi = std::log(2.0);
    const double hr = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
    const double hj = -(2 * 0.125 * std::log(0.125) + 2 * 0.375 * std::log(0.375));
    CHECK(nmi(a, b, 4) == doctest::Approx((hi + hr) / hj).epsilon(1e-14));
    CHECK(mi(a, b, 4) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(nmi(a, b, 4) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("NMI and PCC ignore affine normalization") {
    std::mt19937_64 gen(27);
    for (int t = 0; t < 30; ++t) {
        const auto a = testutil::random_image(gen, 16, 16, 0, 1000);
        const auto b = noisy(a, 200.0, t);
        const double n0 = nmi(a, b);
        const double p0 = pcc(a, b);
        CHECK(std::abs(nmi(minmax(a), minmax(b)) - n0) < 1e-9);
        CHECK(std::abs(nmi(zscore(a), zscore(b)) - n0) < 1e-9);
        CHECK(std::abs(nmi(quantile_norm(a), quantile_norm(b)) - n0) < 1e-9);
        CHECK(std::abs(nmi(cminmax(a, 0, 100), cminmax(b, 0, 100)) - n0) < 1e-9);
        CHECK(std::abs(pcc(minmax(a), minmax(b)) - p0) < 1e-12);
        CHECK(std::abs(pcc(zscore(a), zscore(b)) - p0) < 1e-12);
        CHECK(std::abs(pcc(quantile_norm(a), quantile_norm(b)) - p0) < 1e-12);
        CHECK(std::abs(pcc(affine(a, 7.0, -3.0), b) - p0) < 1e-12);
    }
}

TEST_CASE("PCC") {
    std::mt19937_64 gen(28);
    for (int t = 0; t < 100; ++t) {
        const auto a = testutil::random_image(gen, 16, 16, -5, 5);
        const auto b = testutil::random_image(gen, 16, 16, -5, 5);
        CHECK(std::abs(pcc(a, b) - oracle::pcc(a, b)) < 1e-9);
        CHECK(pcc(a, b) == pcc(b, a));
        CHECK(pcc(a, affine(a, 2.5, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pcc(a, affine(a, -1.0, 0.0)) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    try {
        pcc(ImageGrid::filled(3, 3, 1.0), ImageGrid(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
        FAIL("expected an error");
    } catch (const DegenerateError& e) {
        CHECK(std::string(e.what()).find("undefined correlation") != std::string::npos);
    }
}

TEST_CASE("DSC") {
    std::vector<std::int32_t> a(400, 0), b(400, 0);
    for (int i = 0; i < 100; ++i) a[i] = 1;
    for (int i = 50; i < 150; ++i) b[i] = 1;
    const LabelMask ma(20, 20, a), mb(20, 20, b);
    CHECK(dsc(ma, mb, 1) == doctest::Approx(100.0000001 / 200.0000001).epsilon(1e-15));
    CHECK(dsc(ma, ma, 1) == doctest::Approx(1.0).epsilon(1e-7 / 200));
    const LabelMask empty(20, 20, std::vector<std::int32_t>(400, 0));
    CHECK(dsc(empty, empty, 1) == 1.0);
    CHECK(dsc(ma, mb) == dsc(mb, ma));

    std::vector<std::int32_t> c(400, 0);
    for (int i = 0; i < 100; ++i) c[i] = i < 50 ? 1 : 2;
    const LabelMask mc(20, 20, c);
    CHECK(dsc(ma, mc, kTotalForeground) == doctest::Approx(1.0));
    CHECK(dsc(ma, mc, 1) == doctest::Approx(100.0000001 / 150.0000001));
    CHECK_THROWS_AS(dsc(ma, LabelMask(10, 40, a), 1), InvalidArgument);
}
