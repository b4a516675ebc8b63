#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mrqm {

struct Spacing {
    double dx = 1.0;
    double dy = 1.0;
};

/// Row-major 2D raster of finite 64-bit intensities.
///
/// Immutable after construction. Row index runs over the height, column index
/// over the width; pixel (row, col) lives at data[row * width + col].
class ImageGrid {
public:
    ImageGrid() = default;

    /// Throws InvalidArgument if data.size() != width * height and
    /// DataError if any value is NaN or infinite.
    ImageGrid(std::size_t width, std::size_t height, std::vector<double> data,
              std::optional<Spacing> spacing = std::nullopt);

    static ImageGrid filled(std::size_t width, std::size_t height, double value);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col]; }
    std::span<const double> values() const noexcept { return data_; }
    const std::optional<Spacing>& spacing() const noexcept { return spacing_; }

    /// New image with this image's shape and spacing.
    ImageGrid with_values(std::vector<double> data) const;

    bool same_shape(const ImageGrid& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const ImageGrid& a, const ImageGrid& b) noexcept {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
    }

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
    std::optional<Spacing> spacing_;
};

/// Integer class id per pixel, 0 is background.
class LabelMask {
public:
    LabelMask() = default;
    LabelMask(std::size_t width, std::size_t height, std::vector<std::int32_t> labels);

    /// Rounds every intensity to the nearest integer. Throws DataError for
    /// non-integral values.
    static LabelMask from_image(const ImageGrid& image);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::span<const std::int32_t> labels() const noexcept { return labels_; }

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::int32_t> labels_;
};

/// Nearest-rank intensity statistics of one image.
class IntensityStats {
public:
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0; ///< corrected sample standard deviation (N - 1)
    double median = 0.0;

    /// Smallest intensity v such that at least k% of the pixels are <= v.
    double percentile(double k) const;

    const std::vector<double>& sorted() const noexcept { return sorted_; }

private:
    friend IntensityStats compute_stats(const ImageGrid& image);
    std::vector<double> sorted_;
};

IntensityStats compute_stats(const ImageGrid& image);

/// Nearest-rank percentile over an ascending-sorted, non-empty sample.
double percentile_sorted(std::span<const double> sorted, double k);

double mean_of(std::span<const double> values);
/// Divisor N.
double population_std(std::span<const double> values);
/// Divisor N - 1; zero for fewer than two values.
double sample_std(std::span<const double> values);

// ---------------------------------------------------------------------------
// Data range

enum class DataRangeKind { PerImage, Pair, Dataset, Fixed };

struct DataRangeMode {
    DataRangeKind kind = DataRangeKind::Pair;
    double fixed_value = 0.0;

    static DataRangeMode per_image() { return {DataRangeKind::PerImage, 0.0}; }
    static DataRangeMode pair() { return {DataRangeKind::Pair, 0.0}; }
    static DataRangeMode dataset() { return {DataRangeKind::Dataset, 0.0}; }
    static DataRangeMode fixed(double value) { return {DataRangeKind::Fixed, value}; }

    /// "per-image", "pair", "dataset", "fixed:<v>"
    static DataRangeMode parse(std::string_view text);
    std::string to_string() const;
};

/// Resolves L. PerImage uses the first image, Pair requires exactly two,
/// Dataset spans all of them. Throws DegenerateError when L == 0.
double resolve_data_range(const DataRangeMode& mode, std::span<const ImageGrid* const> images);
double resolve_data_range(const DataRangeMode& mode, const ImageGrid& image);
double resolve_data_range(const DataRangeMode& mode, const ImageGrid& a, const ImageGrid& b);

// ---------------------------------------------------------------------------
// Raster I/O

enum class RasterFormat { Npy, Pgm, Csv };

/// Guesses the format from the file extension (.npy, .pgm, .csv).
RasterFormat format_from_path(const std::filesystem::path& path);
RasterFormat parse_raster_format(std::string_view name);

ImageGrid load_raster(const std::filesystem::path& path, RasterFormat format);
ImageGrid load_raster(const std::filesystem::path& path);

/// PGM output needs integral intensities in [0, 65535]; the bit depth is 8
/// when every value fits into a byte, else 16.
void save_raster(const ImageGrid& image, const std::filesystem::path& path, RasterFormat format);
void save_raster(const ImageGrid& image, const std::filesystem::path& path);

std::string encode_npy(const ImageGrid& image);
ImageGrid decode_npy(std::string_view bytes);
ImageGrid decode_pgm(std::string_view bytes);
std::string encode_pgm(const ImageGrid& image);
ImageGrid decode_csv_grid(std::string_view text);
std::string encode_csv_grid(const ImageGrid& image);

// ---------------------------------------------------------------------------
// Phantom

struct PhantomInfo {
    double lesion_row = 0.0;
    double lesion_col = 0.0;
    double lesion_radius = 0.0;
    int tissue_layers = 0;
};

/// Deterministic brain-like test slice: zero background, an elliptical head
/// with 3-6 nested tissue ellipses, fine tissue texture and one bright lesion
/// in a single lateral half. width and height must be >= 64.
ImageGrid make_phantom(std::uint64_t seed, std::size_t width = 240, std::size_t height = 240,
                       PhantomInfo* info = nullptr);

/// Binary lesion mask (label 1) matching make_phantom for the same arguments.
LabelMask make_phantom_lesion_mask(std::uint64_t seed, std::size_t width = 240, std::size_t height = 240);

/// Shortest decimal text that parses back to the same double; integral
/// values keep a trailing ".0", infinities print as "inf" / "-inf".
std::string format_double(double value);

} // namespace mrqm
