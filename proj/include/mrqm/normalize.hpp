#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "mrqm/image.hpp"

namespace mrqm {

enum class NormMethod { None, Minmax, CMinmax, Zscore, Quantile, Binning, PL };

/// Landmarks of a piecewise-linear histogram standardization.
struct PLModel {
    double s1 = 0.0;
    double m_s = 0.0;
    double s2 = 0.0;
    double p_low = 1.0;
    double p_high = 99.0;

    std::string to_json() const;
    static PLModel from_json(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static PLModel load(const std::filesystem::path& path);

    friend bool operator==(const PLModel&, const PLModel&) = default;
};

struct NormalizationSpec {
    NormMethod method = NormMethod::None;
    double j1 = 0.0;
    double j2 = 1.0;
    double p = 5.0;   ///< cMinmax lower clip percentile
    double q = 95.0;  ///< cMinmax upper clip percentile
    int bins = 256;
    std::optional<PLModel> pl;

    /// "none", "minmax", "cminmax[:p]", "zscore", "quantile", "binning[:B]",
    /// "pl:<model.json>". The PL model file is loaded eagerly.
    static NormalizationSpec parse(std::string_view text);
    /// Short tag used in reports ("none", "minmax", ..., "pl").
    std::string name() const;
};

/// (I - i1) / (i2 - i1) * (j2 - j1) + j1; constant j1 when i1 == i2.
ImageGrid minmax(const ImageGrid& image, double i1, double i2, double j1, double j2);
/// Minmax with the image's own extrema.
ImageGrid minmax(const ImageGrid& image, double j1 = 0.0, double j2 = 1.0);

/// Clips to [I_p%, I_q%] and rescales to [j1, j2]. A negative q means 100 - p.
ImageGrid cminmax(const ImageGrid& image, double p = 5.0, double q = -1.0, double j1 = 0.0, double j2 = 1.0);

/// Zero mean, unit population standard deviation; zeros for constant input.
ImageGrid zscore(const ImageGrid& image);

/// (I - I_50%) / (I_75% - I_25%); I - I_50% when the IQR vanishes.
ImageGrid quantile_norm(const ImageGrid& image);

/// Integer bin index in [0, B - 1]; zeros for constant input.
ImageGrid binning(const ImageGrid& image, int bins = 256);

/// Needs at least two training images with foreground (> 0) pixels.
PLModel pl_fit(std::span<const ImageGrid> images, double p_low = 1.0, double p_high = 99.0);
ImageGrid pl_apply(const ImageGrid& image, const PLModel& model);

ImageGrid normalize(const ImageGrid& image, const NormalizationSpec& spec);

} // namespace mrqm
