#pragma once

#include <array>

#include "mrqm/image.hpp"

namespace mrqm {

struct SsimParams {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    DataRangeMode data_range = DataRangeMode::pair();
};

inline constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

/// Mean SSIM over all pixels, Gaussian window with reflect padding.
double ssim(const ImageGrid& image, const ImageGrid& reference, const SsimParams& params = {});

/// Five-scale MS-SSIM. Needs min(width, height) >= 176.
double ms_ssim(const ImageGrid& image, const ImageGrid& reference, const SsimParams& params = {});

struct CwSsimParams {
    int levels = 2;
    int orientations = 16;
    std::size_t window = 7;
    double k = 1e-12;
};

/// Complex-wavelet SSIM on images rescaled individually to [0, 255]. Scored on
/// the oriented subbands of the coarsest pyramid level, sampled at that
/// level's resolution, averaged over window positions and orientations.
double cw_ssim(const ImageGrid& image, const ImageGrid& reference, const CwSsimParams& params = {});

/// 10 log10(L^2 / MSE); +inf for identical images.
double psnr(const ImageGrid& image, const ImageGrid& reference, const DataRangeMode& mode = DataRangeMode::pair());

struct ErrorMetrics {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    double nmse = 0.0;
};

/// All four error metrics; throws DegenerateError for a constant reference.
ErrorMetrics error_metrics(const ImageGrid& image, const ImageGrid& reference);
double mae(const ImageGrid& image, const ImageGrid& reference);
double mse(const ImageGrid& image, const ImageGrid& reference);
double rmse(const ImageGrid& image, const ImageGrid& reference);
/// Sum of squared errors over |I| times the corrected sample std of the reference.
double nmse(const ImageGrid& image, const ImageGrid& reference);

/// Mutual information in nats after binning each image to `bins` values.
double mi(const ImageGrid& image, const ImageGrid& reference, int bins = 256);
/// (H(I) + H(R)) / H(I, R), in [1, 2]; 2 when both images are constant.
double nmi(const ImageGrid& image, const ImageGrid& reference, int bins = 256);

/// Pearson correlation; throws DegenerateError if either image is constant.
double pcc(const ImageGrid& image, const ImageGrid& reference);

/// Class id selecting every nonzero label.
inline constexpr int kTotalForeground = -1;

double dsc(const LabelMask& a, const LabelMask& b, int class_id = kTotalForeground, double epsilon = 1e-7);

} // namespace mrqm
