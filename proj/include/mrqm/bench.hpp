#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrqm/distort.hpp"
#include "mrqm/image.hpp"
#include "mrqm/normalize.hpp"

namespace mrqm {

/// Sweep definition. Either `input_dir` (every .npy/.pgm/.csv file, sorted by
/// name) or `phantom_count` phantoms with seeds seed, seed + 1, ...
struct BenchmarkConfig {
    std::filesystem::path input_dir;
    std::size_t phantom_count = 0;
    std::size_t phantom_size = 240;
    std::vector<std::string> metrics;
    std::vector<std::string> normalizations{"none"};
    std::vector<DistortionKind> distortions{kAllDistortions.begin(), kAllDistortions.end()};
    std::vector<double> strengths{1.0, 2.0, 3.0, 4.0, 5.0};
    std::uint64_t seed = 0;
    DataRangeMode data_range = DataRangeMode::pair();
    std::filesystem::path output_dir = "bench_out";
    unsigned threads = 0;  ///< 0 = hardware concurrency
    std::filesystem::path niqe_model;
    std::filesystem::path brisque_model;

    /// Throws InvalidArgument on empty lists, unknown names, out-of-range
    /// strengths or missing model files for model-based metrics.
    void validate() const;

    /// Relative paths in the file are resolved against `base_dir`.
    static BenchmarkConfig from_toml(std::string_view text, const std::filesystem::path& base_dir = ".");
    static BenchmarkConfig load(const std::filesystem::path& path);
};

/// One evaluated tuple. Reference rows (strength 0, distortion "reference")
/// hold non-reference metrics of the undistorted image. A non-empty `error`
/// marks a failed evaluation; its score is NaN.
struct ResultRow {
    std::string image_id;
    std::string distortion;
    double strength = 0.0;
    std::string normalization;
    std::string metric;
    double score = 0.0;
    std::string error;
};

inline constexpr std::string_view kReferenceRow = "reference";

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& config);

/// Median with +inf ordered above every finite value; for an even count
/// whose middle pair is {finite, inf} the finite value is returned.
double median_with_infinity(std::vector<double> values);

struct TableCell {
    std::string distortion;
    std::string metric;
    std::string normalization;
    double median = 0.0;
    std::size_t count = 0;
    std::optional<double> relative;  ///< empty when the pooled median is 0
    double shading = 0.0;             ///< 1 = most sensitive distortion of the column
};

/// Cells in report order: distortion (reference row last), then metric in
/// registry order, then normalization in `normalizations` order. Throws
/// InvalidArgument for an empty row set.
std::vector<TableCell> aggregate(std::span<const ResultRow> rows, std::span<const std::string> normalizations);

std::string rows_csv(std::span<const ResultRow> rows);
std::string medians_csv(std::span<const TableCell> cells);
std::string relative_csv(std::span<const TableCell> cells);
std::string table_markdown(std::span<const TableCell> cells);

/// Runs the sweep and writes rows.csv, medians.csv, relative.csv and table.md.
std::vector<TableCell> run_and_write(const BenchmarkConfig& config);

} // namespace mrqm
