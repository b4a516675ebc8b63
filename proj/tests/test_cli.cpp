#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace {

struct Result {
    int exit_code = -1;
    std::string out;
};

// Runs the CLI with stderr discarded and returns its exit code and stdout.
Result run(const std::string& args) {
    const std::string cmd = std::string(MRQM_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

} // namespace

TEST_CASE("phantom is deterministic") {
    testutil::TempDir dir;
    CHECK(run("phantom --seed 7 --out " + q(dir.path / "a.npy")).exit_code == 0);
    CHECK(run("phantom --seed 7 --out " + q(dir.path / "b.npy") + " --mask " + q(dir.path / "m.npy")).exit_code == 0);
    CHECK(slurp(dir.path / "a.npy") == slurp(dir.path / "b.npy"));
    CHECK(std::filesystem::exists(dir.path / "m.npy"));
    CHECK(run("phantom --seed 8 --out " + q(dir.path / "c.npy")).exit_code == 0);
    CHECK(slurp(dir.path / "a.npy") != slurp(dir.path / "c.npy"));
}

TEST_CASE("metric prints one row per metric") {
    testutil::TempDir dir;
    const auto p = dir.path / "p.npy";
    REQUIRE(run("phantom --seed 3 --out " + q(p)).exit_code == 0);
    const auto r = run("metric --ref " + q(p) + " --img " + q(p) + " --metrics ssim,psnr --norm zscore --data-range pair");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "ssim,1.0,higher,pair,zscore\npsnr,inf,higher,pair,zscore\n");
    const auto h = run("metric --img " + q(p) + " --metrics mtv,cpbd --header");
    CHECK(h.exit_code == 0);
    CHECK(h.out.rfind("metric,score,orientation,data_range_mode,normalization\nmtv,", 0) == 0);
    CHECK(h.out.find("\ncpbd,") != std::string::npos);
}

TEST_CASE("exit codes") {
    testutil::TempDir dir;
    const auto c = dir.path / "c.csv";
    {
        std::ofstream f(c);
        f << "2,2,2\n2,2,2\n2,2,2\n";
    }
    const auto constant = run("metric --ref " + q(c) + " --img " + q(c) + " --metrics pcc");
    CHECK(constant.exit_code == 3);
    CHECK(constant.out.empty());
    CHECK(run("metric --img " + q(dir.path / "missing.npy") + " --metrics mtv").exit_code == 2);
    CHECK(run("metric --img " + q(c) + " --metrics mtv --bogus").exit_code == 1);
    CHECK(run("metric --img " + q(c) + " --metrics nosuch").exit_code == 1);
    CHECK(run("metric --img " + q(c) + " --metrics ssim").exit_code == 1);
    CHECK(run("").exit_code == 1);
    CHECK(run("frobnicate").exit_code == 1);
}

TEST_CASE("normalize, distort and dsc") {
    testutil::TempDir dir;
    const auto p = dir.path / "p.npy";
    REQUIRE(run("phantom --seed 2 --width 64 --height 64 --out " + q(p) + " --mask " + q(dir.path / "m.npy")).exit_code ==
            0);
    CHECK(run("normalize --in " + q(p) + " --norm minmax --out " + q(dir.path / "n.csv")).exit_code == 0);
    CHECK(std::filesystem::file_size(dir.path / "n.csv") > 0);
    CHECK(run("normalize --in " + q(p) + " --norm nonsense --out " + q(dir.path / "x.npy")).exit_code == 1);
    CHECK(run("distort --in " + q(p) + " --kind gaussian-noise --strength 2 --seed 4 --out " + q(dir.path / "d1.npy"))
              .exit_code == 0);
    CHECK(run("distort --in " + q(p) + " --kind GaussianNoise --strength 2 --seed 4 --out " + q(dir.path / "d2.npy"))
              .exit_code == 0);
    CHECK(slurp(dir.path / "d1.npy") == slurp(dir.path / "d2.npy"));
    CHECK(run("distort --in " + q(p) + " --kind GaussianNoise --strength 9 --out " + q(dir.path / "d3.npy")).exit_code ==
          1);
    const auto d = run("dsc --a " + q(dir.path / "m.npy") + " --b " + q(dir.path / "m.npy"));
    CHECK(d.exit_code == 0);
    CHECK(d.out.rfind("dsc,", 0) == 0);
}

TEST_CASE("pl-fit and pl normalization") {
    testutil::TempDir dir;
    std::string files;
    for (int s = 0; s < 3; ++s) {
        const auto p = dir.path / ("p" + std::to_string(s) + ".npy");
        REQUIRE(run("phantom --seed " + std::to_string(s) + " --width 64 --height 64 --out " + q(p)).exit_code == 0);
        files += " " + q(p);
    }
    const auto model = dir.path / "pl.json";
    CHECK(run("pl-fit" + files + " --out " + q(model)).exit_code == 0);
    CHECK(run("normalize --in " + q(dir.path / "p0.npy") + " --norm " + q("pl:" + model.string()) + " --out " +
              q(dir.path / "n.npy"))
              .exit_code == 0);
}

TEST_CASE("niqe-fit and niqe scoring") {
    testutil::TempDir dir;
    const auto model = dir.path / "niqe.json";
    CHECK(run("niqe-fit --phantoms 20 --seed 100 --out " + q(model)).exit_code == 0);
    CHECK(run("niqe-fit --phantoms 3 --out " + q(dir.path / "few.json")).exit_code == 1);
    const auto p = dir.path / "p.npy";
    REQUIRE(run("phantom --seed 1 --out " + q(p)).exit_code == 0);
    const auto r = run("metric --img " + q(p) + " --metrics niqe --niqe-model " + q(model));
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("niqe,", 0) == 0);
    CHECK(run("metric --img " + q(p) + " --metrics niqe").exit_code == 1);
}

TEST_CASE("bench writes its tables") {
    testutil::TempDir dir;
    {
        std::ofstream f(dir.path / "bench.toml");
        f << "phantom_count = 2\nphantom_size = 64\nmetrics = [\"ssim\", \"mse\", \"mtv\"]\n"
             "normalizations = [\"none\", \"minmax\"]\ndistortions = [\"GaussianBlur\", \"ShiftIntensity\"]\n"
             "strengths = [1, 5]\noutput_dir = \"out\"\n";
    }
    CHECK(run("bench --config " + q(dir.path / "bench.toml")).exit_code == 0);
    for (const char* f : {"rows.csv", "medians.csv", "relative.csv", "table.md"})
        CHECK(std::filesystem::exists(dir.path / "out" / f));
    CHECK(run("bench --config " + q(dir.path / "bench.toml") + " --out " + q(dir.path / "again") + " --threads 1")
              .exit_code == 0);
    CHECK(slurp(dir.path / "out" / "rows.csv") == slurp(dir.path / "again" / "rows.csv"));
    CHECK(slurp(dir.path / "out" / "table.md") == slurp(dir.path / "again" / "table.md"));
    CHECK(run("bench --config " + q(dir.path / "none.toml")).exit_code == 2);
}
