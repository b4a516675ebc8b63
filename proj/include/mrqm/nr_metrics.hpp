#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrqm/image.hpp"

namespace mrqm {

// ---------------------------------------------------------------------------
// Blurriness

/// max over axes of (S_d - S~_d) / S_d, where S~_d re-blurs with a box of k
/// taps along d. Axes without any gradient are skipped; throws
/// DegenerateError when no axis has one.
double blur_effect(const ImageGrid& image, std::size_t k = 11);

struct BlurRatio {
    double br = 0.0;  ///< blurred edge pixels / edge pixels
    double mb = 0.0;  ///< mean inverse blurriness of blurred pixels; 0 when none
};

/// Gradient-rule edges, inverse blurriness |I - A| / A with A the mean of the
/// two neighbours along each axis, on intensities multiplied by 255 / L.
/// Throws DegenerateError when there are no edge pixels.
BlurRatio blur_ratio_mean_blur(const ImageGrid& image, double t_ib = 0.1,
                               const DataRangeMode& mode = DataRangeMode::per_image());

/// Population variance of the five-point Laplacian, reflect boundary.
double variance_of_laplacian(const ImageGrid& image);

/// Per-axis binary edge indicators. Axis 0 marks edges found across columns
/// (horizontal gradient), axis 1 edges across rows.
struct EdgeMap {
    enum class Detector { GradientRule, Canny };

    std::size_t width = 0;
    std::size_t height = 0;
    Detector detector = Detector::Canny;
    double t_low = 0.0;
    double t_high = 0.0;
    std::array<std::vector<std::uint8_t>, 2> axis;

    bool any(std::size_t row, std::size_t col) const {
        return axis[0][row * width + col] != 0 || axis[1][row * width + col] != 0;
    }
    std::size_t count(int d) const;
};

/// Mean-gradient plus strict local-maximum rule on forward differences.
EdgeMap gradient_edges(const ImageGrid& image);

/// Canny detector: Gaussian smoothing, Sobel gradient, non-maximum
/// suppression and hysteresis on the Sobel magnitude. Each edge pixel is
/// assigned to the axis of its dominant gradient component.
EdgeMap canny_edges(const ImageGrid& image, double t_low, double t_high, double sigma = 1.0);

/// Canny with thresholds 0.1 L and 0.2 L.
EdgeMap canny_edges(const ImageGrid& image, const DataRangeMode& mode = DataRangeMode::per_image());

/// Width of the edge through (row, col) along axis d: steps taken in both
/// directions while the intensity keeps changing with the sign it has at the
/// pixel. An ideal step edge has width 1.
std::size_t edge_width(const ImageGrid& image, std::size_t row, std::size_t col, int d);

/// Mean edge width per axis, averaged over axes that have edges.
double blurred_edge_widths(const ImageGrid& image, const DataRangeMode& mode = DataRangeMode::per_image());

struct JnbParams {
    std::size_t block = 64;
    double edge_fraction = 0.002;  ///< T
    double beta = 3.6;
};

/// Block size 64, edge blocks with edge fraction > T, jnb width 5 for low
/// contrast blocks ((max - min) / L <= 50/255) else 3.
double jnb(const ImageGrid& image, const DataRangeMode& mode = DataRangeMode::per_image(), const JnbParams& params = {});

/// Fraction of processed edge pixels whose blur detection probability is
/// at most 0.63.
double cpbd(const ImageGrid& image, const DataRangeMode& mode = DataRangeMode::per_image(), const JnbParams& params = {});

// ---------------------------------------------------------------------------
// MR line correlation and total variation

/// Half the sum of the mean correlation of adjacent columns and of adjacent
/// rows. Pairs with a constant line are skipped.
double mlc(const ImageGrid& image);

/// As mlc, for lines floor(w / 2) columns and floor(h / 2) rows apart.
double mslc(const ImageGrid& image);

/// Mean L2 norm of forward differences; the difference past the last
/// row/column is zero.
double mtv(const ImageGrid& image);

// ---------------------------------------------------------------------------
// Natural scene statistics

struct GgdFit {
    double shape = 0.0;
    double variance = 0.0;
};

struct AggdFit {
    double shape = 0.0;
    double mean = 0.0;
    double left_variance = 0.0;
    double right_variance = 0.0;
};

/// Moment-ratio fits over the shape grid 0.2, 0.201, ..., 10.
GgdFit fit_ggd(std::span<const double> values);
AggdFit fit_aggd(std::span<const double> values);

using NssFeatures = std::array<double, 18>;

/// Mean subtracted contrast normalized coefficients: (I - mu) / (sigma + C)
/// with a 7x7 Gaussian window (sigma 7/6).
ImageGrid mscn(const ImageGrid& image, double c = 1.0);

/// GGD (shape, variance) of the MSCN coefficients followed by AGGD (shape,
/// mean, left variance, right variance) of the H, V, D1 and D2 products.
NssFeatures brisque_features(const ImageGrid& image, double c = 1.0);

/// Support vector regressor over BRISQUE features, loaded from JSON:
/// {"kernel": "linear" | "rbf", "gamma": g, "bias": b,
///  "support_vectors": [[18 values], ...], "coefficients": [...],
///  "feature_min": [...], "feature_max": [...]}  (min/max optional; when
/// present features are scaled to [-1, 1] first).
struct BrisqueModel {
    enum class Kernel { Linear, Rbf };
    Kernel kernel = Kernel::Rbf;
    double gamma = 0.05;
    double bias = 0.0;
    std::vector<NssFeatures> support_vectors;
    std::vector<double> coefficients;
    std::vector<double> feature_min;
    std::vector<double> feature_max;

    static BrisqueModel from_json(const std::string& text);
    static BrisqueModel load(const std::filesystem::path& path);
    double predict(const NssFeatures& features) const;
};

double brisque_score(const ImageGrid& image, const BrisqueModel& model, double c = 1.0);

inline constexpr std::size_t kNiqeFeatures = 36;

struct NiqeFitParams {
    std::size_t patch = 96;
    /// Keeps patches whose mean local deviation reaches this nearest-rank
    /// percentile of the image's patches; 0 keeps every patch.
    double sharpness_percentile = 75.0;
    std::size_t min_images = 20;
    unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct NiqeModel {
    std::vector<double> mean;        ///< 36
    std::vector<double> covariance;  ///< 36 x 36, row-major
    std::size_t patch = 96;
    double sharpness_percentile = 75.0;
    std::size_t corpus_size = 0;
    std::size_t patch_count = 0;
    std::string created;  ///< UTC date of the fit, YYYY-MM-DD

    /// JSON header with base64 little-endian float64 arrays.
    std::string to_json() const;
    static NiqeModel from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static NiqeModel load(const std::filesystem::path& path);
};

/// 36 features (18 at full size, 18 after 2x2 mean pooling) for every
/// non-overlapping patch; patches whose statistics are undefined (e.g. flat
/// background) are left out.
std::vector<std::array<double, kNiqeFeatures>> niqe_patch_features(const ImageGrid& image, std::size_t patch,
                                                                   double sharpness_percentile = 0.0);

NiqeModel niqe_fit(std::span<const ImageGrid> corpus, const NiqeFitParams& params = {});

/// sqrt(d^T ((Sigma_R + Sigma_I) / 2)^+ d) with d = nu_R - nu_I. With
/// use_pinv false a singular matrix raises DegenerateError.
double niqe_score(const ImageGrid& image, const NiqeModel& model, bool use_pinv = true);

} // namespace mrqm
