#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrqm/image.hpp"

namespace mrqm {

enum class DistortionKind {
    BiasField,
    Ghosting,
    StripeArtifact,
    GaussianBlur,
    GaussianNoise,
    ReplaceArtifact,
    GammaHigh,
    GammaLow,
    ShiftIntensity,
    Translation,
    ElasticDeform,
};

/// Every kind, in report order.
inline constexpr std::array<DistortionKind, 11> kAllDistortions = {
    DistortionKind::BiasField,       DistortionKind::Ghosting,        DistortionKind::StripeArtifact,
    DistortionKind::GaussianBlur,    DistortionKind::GaussianNoise,   DistortionKind::ReplaceArtifact,
    DistortionKind::GammaHigh,       DistortionKind::GammaLow,        DistortionKind::ShiftIntensity,
    DistortionKind::Translation,     DistortionKind::ElasticDeform,
};

std::string_view distortion_name(DistortionKind kind);
/// Accepts the CamelCase names above, case-insensitively, with or without
/// '-' / '_' separators ("gaussian-blur", "GAUSSIAN_BLUR").
DistortionKind parse_distortion(std::string_view name);

struct DistortionSpec {
    DistortionKind kind = DistortionKind::GaussianBlur;
    double strength = 1.0;  ///< in [1, 5]
    std::uint64_t seed = 0;
};

/// Parameter values for one strength. `value` is the single scalar of most
/// kinds (c, sigma, i, f, gamma); ElasticDeform uses `grid` and `deform`.
struct DistortionParams {
    double value = 0.0;
    int grid = 0;
    double deform = 0.0;
};

/// Linear interpolation between the strength-1 and strength-5 endpoints
/// (log-gamma for the gamma kinds; the elastic grid size is rounded).
DistortionParams interpolate_param(DistortionKind kind, double strength);

ImageGrid apply_distortion(const ImageGrid& image, const DistortionSpec& spec);

struct SweepItem {
    DistortionSpec spec;
    ImageGrid image;
};

/// Seed for one (kind, strength index) cell of a sweep:
/// master ^ mix64(kind_index << 8 | strength_index).
std::uint64_t sweep_seed(std::uint64_t master, DistortionKind kind, std::size_t strength_index);

/// Every kind at every strength, kind-major.
std::vector<SweepItem> sweep(const ImageGrid& image, std::span<const DistortionKind> kinds,
                             std::span<const double> strengths, std::uint64_t seed);

} // namespace mrqm
