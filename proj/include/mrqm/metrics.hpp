#pragma once

#include <span>
#include <string>
#include <string_view>

#include "mrqm/image.hpp"
#include "mrqm/nr_metrics.hpp"

namespace mrqm {

/// One entry of the metric registry. Names are the lowercase abbreviations
/// used on the command line and in every report.
struct MetricInfo {
    std::string_view name;
    bool needs_reference = false;
    bool higher_is_better = false;
    bool uses_data_range = false;
    bool needs_model = false;
};

/// Reference metrics first, then non-reference metrics, in report order.
std::span<const MetricInfo> metric_registry();

/// Throws InvalidArgument for unknown names.
const MetricInfo& find_metric(std::string_view name);

/// "higher" or "lower".
std::string_view orientation_name(bool higher_is_better);

struct MetricModels {
    const NiqeModel* niqe = nullptr;
    const BrisqueModel* brisque = nullptr;
};

/// Evaluates one metric. `reference` must be set for reference metrics and
/// is ignored otherwise. The data range mode is passed to the metrics that
/// take one; Pair on a non-reference metric resolves over the single image.
double evaluate_metric(const MetricInfo& metric, const ImageGrid& image, const ImageGrid* reference,
                       const DataRangeMode& mode = DataRangeMode::pair(), const MetricModels& models = {});

struct MetricReport {
    std::string metric;
    double score = 0.0;
    bool higher_is_better = false;
    std::string data_range_mode;
    std::string normalization;

    /// metric,score,orientation,data_range_mode,normalization
    std::string csv_row() const;
    static std::string_view csv_header();
};

} // namespace mrqm
