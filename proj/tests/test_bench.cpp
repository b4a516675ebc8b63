#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "mrqm/bench.hpp"
#include "mrqm/error.hpp"
#include "mrqm/metrics.hpp"
#include "test_util.hpp"

using namespace mrqm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BenchmarkConfig small_config() {
    BenchmarkConfig c;
    c.phantom_count = 2;
    c.phantom_size = 64;
    c.metrics = {"ssim"};
    c.threads = 2;
    return c;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ResultRow row(const std::string& d, const std::string& m, double score) {
    return {"img", d, 1.0, "none", m, score, {}};
}

} // namespace

TEST_CASE("median with infinity") {
    CHECK(median_with_infinity({1.0, 2.0, 3.0}) == 2.0);
    CHECK(median_with_infinity({1.0, kInf}) == 1.0);
    CHECK(median_with_infinity({kInf, 1.0}) == 1.0);
    CHECK(median_with_infinity({kInf, kInf, 1.0}) == kInf);
    CHECK(median_with_infinity({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median_with_infinity({kInf, 5.0, kInf, 1.0}) == 5.0);
    CHECK_THROWS_AS(median_with_infinity({}), InvalidArgument);
}

TEST_CASE("metric registry") {
    CHECK(find_metric("ssim").higher_is_better);
    CHECK(find_metric("ms-ssim").needs_reference);
    CHECK_FALSE(find_metric("mse").higher_is_better);
    CHECK(find_metric("mb").higher_is_better);
    CHECK_FALSE(find_metric("br").higher_is_better);
    CHECK(find_metric("cpbd").higher_is_better);
    CHECK_FALSE(find_metric("niqe").higher_is_better);
    CHECK_FALSE(find_metric("mtv").needs_reference);
    CHECK_THROWS_AS(find_metric("lpips"), InvalidArgument);
    for (const auto& m : metric_registry()) CHECK(&find_metric(m.name) == &m);
    const MetricReport r{"ssim", 1.0, true, "pair", "zscore"};
    CHECK(r.csv_row() == "ssim,1.0,higher,pair,zscore");
    CHECK_THROWS_AS(evaluate_metric(find_metric("ssim"), make_phantom(1, 64, 64), nullptr), InvalidArgument);
    CHECK_THROWS_AS(evaluate_metric(find_metric("niqe"), make_phantom(1, 64, 64), nullptr), InvalidArgument);
}

TEST_CASE("row count of a sweep") {
    const auto rows = run_benchmark(small_config());
    CHECK(rows.size() == 2 * 11 * 5);
    for (const auto& r : rows) CHECK(r.error.empty());
}

TEST_CASE("non-reference metrics get reference rows") {
    auto c = small_config();
    c.metrics = {"mtv", "psnr"};
    c.distortions = {DistortionKind::GaussianNoise};
    c.strengths = {1.0, 5.0};
    const auto rows = run_benchmark(c);
    // Per image: reference mtv + 2 strengths x (mtv, psnr).
    CHECK(rows.size() == 2 * (1 + 2 * 2));
    std::size_t refs = 0;
    for (const auto& r : rows) {
        if (r.distortion != kReferenceRow) continue;
        ++refs;
        CHECK(r.metric == "mtv");
        CHECK(r.strength == 0.0);
    }
    CHECK(refs == 2);
}

TEST_CASE("bench output is deterministic and independent of thread count") {
    auto c = small_config();
    c.metrics = {"ssim", "mse", "be"};
    c.normalizations = {"none", "zscore"};
    c.distortions = {DistortionKind::GaussianNoise, DistortionKind::ElasticDeform, DistortionKind::Ghosting};
    const auto a = rows_csv(run_benchmark(c));
    c.threads = 1;
    const auto b = rows_csv(run_benchmark(c));
    c.threads = 5;
    const auto d = rows_csv(run_benchmark(c));
    CHECK(a == b);
    CHECK(a == d);
}

TEST_CASE("intensity shift vanishes under normalization") {
    auto c = small_config();
    c.metrics = {"nmse", "nmi", "pcc"};
    c.normalizations = {"minmax"};
    c.distortions = {DistortionKind::ShiftIntensity};
    for (const auto& r : run_benchmark(c)) {
        REQUIRE(r.error.empty());
        if (r.metric == "nmse") CHECK(std::abs(r.score) < 1e-9);
        if (r.metric == "nmi") CHECK(r.score == 2.0);
        if (r.metric == "pcc") CHECK(std::abs(r.score - 1.0) < 1e-12);
    }
}

TEST_CASE("aggregation and relative scores") {
    std::vector<ResultRow> rows;
    for (double v : {1.0, 2.0, 3.0}) rows.push_back(row("GaussianBlur", "mse", v));
    for (double v : {10.0, 20.0}) rows.push_back(row("GaussianNoise", "mse", v));
    rows.push_back(row("GaussianNoise", "mse", kInf));
    rows.push_back({"img", "GaussianNoise", 1.0, "none", "mse", std::nan(""), "failed"});
    const std::vector<std::string> norms{"none"};
    const auto cells = aggregate(rows, norms);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].distortion == "GaussianBlur");
    CHECK(cells[0].median == 2.0);
    CHECK(cells[1].median == 20.0);
    CHECK(cells[1].count == 3);
    // Pooled {1, 2, 3, 10, 20, inf}: median (3 + 10) / 2.
    CHECK(*cells[0].relative == doctest::Approx(2.0 / 6.5));
    CHECK(cells[0].shading == 0.0);
    CHECK(cells[1].shading == 1.0);

    auto doubled = rows;
    for (auto& r : doubled) r.score *= 2.0;
    const auto cells2 = aggregate(doubled, norms);
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(*cells2[i].relative == doctest::Approx(*cells[i].relative));

    auto shuffled = rows;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(medians_csv(aggregate(shuffled, norms)) == medians_csv(cells));

    std::vector<ResultRow> constant;
    for (const char* d : {"BiasField", "Ghosting", "Translation"}) constant.push_back(row(d, "ssim", 0.7));
    for (const auto& c : aggregate(constant, norms)) CHECK(*c.relative == 1.0);

    std::vector<ResultRow> zeros{row("BiasField", "mse", 0.0), row("Ghosting", "mse", 0.0)};
    for (const auto& c : aggregate(zeros, norms)) CHECK_FALSE(c.relative.has_value());
    CHECK_THROWS_AS(aggregate(std::vector<ResultRow>{}, norms), InvalidArgument);
}

TEST_CASE("table emission") {
    CHECK(medians_csv({}) == "distortion,metric,normalization,median,relative\n");
    auto c = small_config();
    c.metrics = {"ssim", "psnr"};
    const auto rows = run_benchmark(c);
    const auto cells = aggregate(rows, c.normalizations);
    CHECK(cells.size() == 11 * 2);
    const std::string md = table_markdown(cells);
    // Title, caption, blank lines, header and rule + one row per distortion.
    CHECK(count_lines(md) == 11 + 6);
    CHECK(md.find("| ShiftIntensity |") != std::string::npos);
    CHECK(md.find("ssim ↑") != std::string::npos);
    CHECK(count_lines(medians_csv(cells)) == 1 + 22);
    CHECK(count_lines(relative_csv(cells)) == 1 + 11);
}

TEST_CASE("TOML configuration") {
    testutil::TempDir dir;
    const auto cfg = BenchmarkConfig::from_toml(R"(
phantom_count = 3
phantom_size = 64
metrics = ["ssim", "mtv"]
normalizations = ["none", "cminmax:5"]
distortions = ["gaussian-blur", "Translation"]
strengths = [1, 2.5, 5]
seed = 9
data_range = "fixed:255"
output_dir = "out"
threads = 2
)",
                                                dir.path);
    CHECK(cfg.phantom_count == 3);
    CHECK(cfg.metrics.size() == 2);
    CHECK(cfg.normalizations[1] == "cminmax:5");
    CHECK(cfg.distortions == std::vector<DistortionKind>{DistortionKind::GaussianBlur, DistortionKind::Translation});
    CHECK(cfg.strengths == std::vector<double>{1.0, 2.5, 5.0});
    CHECK(cfg.seed == 9);
    CHECK(cfg.data_range.kind == DataRangeKind::Fixed);
    CHECK(cfg.output_dir == dir.path / "out");

    CHECK_THROWS_AS(BenchmarkConfig::from_toml("phantom_count = 2\nmetrics = [\"ssim\"]\ncolour = 1\n"), InvalidArgument);
    CHECK_THROWS_AS(BenchmarkConfig::from_toml("phantom_count = 2\nmetrics = [\"ssim\"]\nstrengths = [0]\n"), InvalidArgument);
    CHECK_THROWS_AS(BenchmarkConfig::from_toml("phantom_count = 2\nmetrics = []\n"), InvalidArgument);
    CHECK_THROWS_AS(BenchmarkConfig::from_toml("phantom_count = 2\nmetrics = [\"niqe\"]\n"), InvalidArgument);
    CHECK_THROWS_AS(BenchmarkConfig::from_toml("phantom_count = = 2\n"), DataError);
    CHECK_THROWS_AS(BenchmarkConfig::load(dir.path / "missing.toml"), DataError);
}

TEST_CASE("an unreadable image loses only its own rows") {
    testutil::TempDir dir;
    save_raster(make_phantom(1, 64, 64), dir.path / "a.npy");
    save_raster(make_phantom(2, 64, 64), dir.path / "c.npy");
    {
        std::ofstream bad(dir.path / "b.npy");
        bad << "not an array";
    }
    BenchmarkConfig c;
    c.input_dir = dir.path;
    c.metrics = {"mse"};
    c.distortions = {DistortionKind::GaussianNoise};
    const auto rows = run_benchmark(c);
    std::size_t a = 0, b = 0, cc = 0;
    for (const auto& r : rows) {
        if (r.image_id == "a.npy") ++a;
        if (r.image_id == "c.npy") ++cc;
        if (r.image_id == "b.npy") {
            ++b;
            CHECK_FALSE(r.error.empty());
        }
    }
    CHECK(a == 5);
    CHECK(cc == 5);
    CHECK(b == 1);
    CHECK(aggregate(rows, c.normalizations)[0].count == 10);
}

TEST_CASE("metric errors become error rows") {
    auto c = small_config();
    c.metrics = {"ms-ssim", "ssim"};
    c.distortions = {DistortionKind::BiasField};
    c.strengths = {1.0};
    const auto rows = run_benchmark(c);
    REQUIRE(rows.size() == 4);
    CHECK_FALSE(rows[0].error.empty());
    CHECK(std::isnan(rows[0].score));
    CHECK(rows[1].error.empty());
}

TEST_CASE("run_and_write produces every output file") {
    testutil::TempDir dir;
    auto c = small_config();
    c.distortions = {DistortionKind::GaussianBlur};
    c.output_dir = dir.path / "out";
    run_and_write(c);
    for (const char* f : {"rows.csv", "medians.csv", "relative.csv", "table.md"})
        CHECK(std::filesystem::exists(c.output_dir / f));
}
