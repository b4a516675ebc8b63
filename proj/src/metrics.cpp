#include "mrqm/metrics.hpp"

#include <array>

#include "mrqm/error.hpp"
#include "mrqm/ref_metrics.hpp"

namespace mrqm {

namespace {

constexpr std::array<MetricInfo, 23> kRegistry = {{
    {"ssim", true, true, true, false},
    {"ms-ssim", true, true, true, false},
    {"cw-ssim", true, true, false, false},
    {"psnr", true, true, true, false},
    {"nmse", true, false, false, false},
    {"mse", true, false, false, false},
    {"rmse", true, false, false, false},
    {"mae", true, false, false, false},
    {"mi", true, true, false, false},
    {"nmi", true, true, false, false},
    {"pcc", true, true, false, false},
    {"be", false, false, false, false},
    {"br", false, false, true, false},
    {"mb", false, true, true, false},
    {"vl", false, false, false, false},
    {"bew", false, false, true, false},
    {"jnb", false, false, true, false},
    {"cpbd", false, true, true, false},
    {"mlc", false, false, false, false},
    {"mslc", false, false, false, false},
    {"brisque", false, false, false, true},
    {"niqe", false, false, false, true},
    {"mtv", false, false, false, false},
}};

SsimParams ssim_params(const DataRangeMode& mode) {
    SsimParams p;
    p.data_range = mode;
    return p;
}

} // namespace

std::span<const MetricInfo> metric_registry() { return kRegistry; }

const MetricInfo& find_metric(std::string_view name) {
    for (const MetricInfo& m : kRegistry)
        if (m.name == name) return m;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

std::string_view orientation_name(bool higher_is_better) { return higher_is_better ? "higher" : "lower"; }

double evaluate_metric(const MetricInfo& metric, const ImageGrid& image, const ImageGrid* reference,
                       const DataRangeMode& mode, const MetricModels& models) {
    const std::string_view n = metric.name;
    if (metric.needs_reference) {
        if (reference == nullptr) throw InvalidArgument("metric '" + std::string(n) + "' needs a reference image");
        const ImageGrid& r = *reference;
        if (n == "ssim") return ssim(image, r, ssim_params(mode));
        if (n == "ms-ssim") return ms_ssim(image, r, ssim_params(mode));
        if (n == "cw-ssim") return cw_ssim(image, r);
        if (n == "psnr") return psnr(image, r, mode);
        if (n == "nmse") return nmse(image, r);
        if (n == "mse") return mse(image, r);
        if (n == "rmse") return rmse(image, r);
        if (n == "mae") return mae(image, r);
        if (n == "mi") return mi(image, r);
        if (n == "nmi") return nmi(image, r);
        if (n == "pcc") return pcc(image, r);
    }
    if (n == "be") return blur_effect(image);
    if (n == "br") return blur_ratio_mean_blur(image, 0.1, mode).br;
    if (n == "mb") return blur_ratio_mean_blur(image, 0.1, mode).mb;
    if (n == "vl") return variance_of_laplacian(image);
    if (n == "bew") return blurred_edge_widths(image, mode);
    if (n == "jnb") return jnb(image, mode);
    if (n == "cpbd") return cpbd(image, mode);
    if (n == "mlc") return mlc(image);
    if (n == "mslc") return mslc(image);
    if (n == "mtv") return mtv(image);
    if (n == "brisque") {
        if (models.brisque == nullptr) throw InvalidArgument("brisque needs a model file");
        return brisque_score(image, *models.brisque);
    }
    if (n == "niqe") {
        if (models.niqe == nullptr) throw InvalidArgument("niqe needs a model file");
        return niqe_score(image, *models.niqe);
    }
    throw InvalidArgument("unknown metric '" + std::string(n) + "'");
}

std::string MetricReport::csv_row() const {
    return metric + "," + format_double(score) + "," + std::string(orientation_name(higher_is_better)) + "," +
           data_range_mode + "," + normalization;
}

std::string_view MetricReport::csv_header() { return "metric,score,orientation,data_range_mode,normalization"; }

} // namespace mrqm
