#include "mrqm/normalize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrqm/error.hpp"
#include "mrqm/log.hpp"

namespace mrqm {

namespace {

std::pair<double, double> extrema(const ImageGrid& image) {
    const auto [lo, hi] = std::minmax_element(image.values().begin(), image.values().end());
    return {*lo, *hi};
}

double parse_number(std::string_view text, const char* what) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v)) {
        throw InvalidArgument(std::string("invalid ") + what + " '" + std::string(text) + "'");
    }
    return v;
}

} // namespace

ImageGrid minmax(const ImageGrid& image, double i1, double i2, double j1, double j2) {
    if (i2 < i1) throw InvalidArgument("minmax needs i2 >= i1");
    std::vector<double> out(image.size(), j1);
    if (i2 > i1) {
        const double span_in = i2 - i1;
        const double span_out = j2 - j1;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (image.values()[i] - i1) / span_in * span_out + j1;
    }
    return image.with_values(std::move(out));
}

ImageGrid minmax(const ImageGrid& image, double j1, double j2) {
    const auto [lo, hi] = extrema(image);
    return minmax(image, lo, hi, j1, j2);
}

ImageGrid cminmax(const ImageGrid& image, double p, double q, double j1, double j2) {
    if (q < 0.0) q = 100.0 - p;
    if (!(p >= 0.0 && q <= 100.0 && p < q)) throw InvalidArgument("cminmax needs 0 <= p < q <= 100");
    const auto stats = compute_stats(image);
    const double lo = stats.percentile(p);
    const double hi = stats.percentile(q);
    std::vector<double> clipped(image.values().begin(), image.values().end());
    for (double& v : clipped) v = std::clamp(v, lo, hi);
    return minmax(image.with_values(std::move(clipped)), lo, hi, j1, j2);
}

ImageGrid zscore(const ImageGrid& image) {
    const double mu = mean_of(image.values());
    const double sd = population_std(image.values());
    std::vector<double> out(image.size(), 0.0);
    if (sd > 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (image.values()[i] - mu) / sd;
    }
    return image.with_values(std::move(out));
}

ImageGrid quantile_norm(const ImageGrid& image) {
    const auto stats = compute_stats(image);
    const double median = stats.median;
    const double iqr = stats.percentile(75) - stats.percentile(25);
    std::vector<double> out(image.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double centered = image.values()[i] - median;
        out[i] = iqr > 0.0 ? centered / iqr : centered;
    }
    return image.with_values(std::move(out));
}

ImageGrid binning(const ImageGrid& image, int bins) {
    if (bins < 2) throw InvalidArgument("binning needs at least 2 bins");
    const auto [lo, hi] = extrema(image);
    std::vector<double> out(image.size(), 0.0);
    if (hi > lo) {
        const double b = static_cast<double>(bins);
        const double range = hi - lo;
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::min(b - 1.0, std::floor(b * ((image.values()[i] - lo) / range)));
        }
    }
    return image.with_values(std::move(out));
}

// ---------------------------------------------------------------------------
// Piecewise-linear standardization

namespace {

struct Landmarks {
    double low = 0.0;
    double mode = 0.0;
    double high = 0.0;
    double bin_width = 0.0;
};

Landmarks image_landmarks(const ImageGrid& image, double p_low, double p_high) {
    std::vector<double> fg;
    for (double v : image.values())
        if (v > 0.0) fg.push_back(v);
    if (fg.empty()) throw DegenerateError("PL normalization needs foreground (> 0) pixels");
    std::sort(fg.begin(), fg.end());
    Landmarks lm;
    lm.low = percentile_sorted(fg, p_low);
    lm.high = percentile_sorted(fg, p_high);

    constexpr int kBins = 256;
    const double lo = fg.front();
    const double hi = fg.back();
    if (hi == lo) {
        lm.mode = lo;
        return lm;
    }
    lm.bin_width = (hi - lo) / kBins;
    std::vector<std::size_t> hist(kBins, 0);
    for (double v : fg) {
        const auto b = std::min<std::size_t>(kBins - 1, static_cast<std::size_t>(std::floor(kBins * ((v - lo) / (hi - lo)))));
        ++hist[b];
    }
    const auto best = static_cast<std::size_t>(std::max_element(hist.begin(), hist.end()) - hist.begin());
    lm.mode = lo + (static_cast<double>(best) + 0.5) * lm.bin_width;
    return lm;
}

void check_percentiles(double p_low, double p_high) {
    if (!(p_low >= 0.0 && p_high <= 100.0 && p_low < p_high)) {
        throw InvalidArgument("PL percentiles need 0 <= p_low < p_high <= 100");
    }
}

} // namespace

PLModel pl_fit(std::span<const ImageGrid> images, double p_low, double p_high) {
    check_percentiles(p_low, p_high);
    if (images.size() < 2) throw InvalidArgument("PL fit needs at least two training images");
    std::vector<Landmarks> lms;
    lms.reserve(images.size());
    PLModel model;
    model.p_low = p_low;
    model.p_high = p_high;
    for (const auto& image : images) {
        lms.push_back(image_landmarks(image, p_low, p_high));
        model.s1 += lms.back().low;
        model.s2 += lms.back().high;
    }
    const double n = static_cast<double>(images.size());
    model.s1 /= n;
    model.s2 /= n;
    if (!(model.s2 > model.s1)) throw DegenerateError("PL fit: standard scale is empty");
    double modes = 0.0;
    for (const auto& lm : lms) {
        const double span = lm.high - lm.low;
        const double t = span > 0.0 ? (lm.mode - lm.low) / span : 0.5;
        modes += model.s1 + t * (model.s2 - model.s1);
    }
    model.m_s = modes / n;
    if (!(model.s1 < model.m_s && model.m_s < model.s2)) {
        throw DegenerateError("PL fit: mode landmark does not lie inside the standard scale");
    }
    return model;
}

ImageGrid pl_apply(const ImageGrid& image, const PLModel& model) {
    check_percentiles(model.p_low, model.p_high);
    if (!(model.s1 < model.m_s && model.m_s < model.s2)) throw InvalidArgument("PL model needs s1 < m_s < s2");
    const Landmarks lm = image_landmarks(image, model.p_low, model.p_high);
    std::vector<double> out(image.size(), model.s1);
    if (lm.high > lm.low) {
        const bool split = lm.mode > lm.low && lm.mode < lm.high;
        if (!split) warn("PL: image mode coincides with a percentile landmark, using a single linear piece");
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double v = image.values()[i];
            double mapped = 0.0;
            if (!split) {
                mapped = model.s1 + (v - lm.low) / (lm.high - lm.low) * (model.s2 - model.s1);
            } else if (v <= lm.mode) {
                mapped = model.s1 + (v - lm.low) / (lm.mode - lm.low) * (model.m_s - model.s1);
            } else {
                mapped = model.m_s + (v - lm.mode) / (lm.high - lm.mode) * (model.s2 - model.m_s);
            }
            out[i] = std::clamp(mapped, model.s1, model.s2);
        }
    }
    return image.with_values(std::move(out));
}

std::string PLModel::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "pl-model";
    j["s1"] = s1;
    j["m_s"] = m_s;
    j["s2"] = s2;
    j["p_low"] = p_low;
    j["p_high"] = p_high;
    return j.dump(2) + "\n";
}

PLModel PLModel::from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        PLModel m;
        m.s1 = j.at("s1").get<double>();
        m.m_s = j.at("m_s").get<double>();
        m.s2 = j.at("s2").get<double>();
        m.p_low = j.value("p_low", 1.0);
        m.p_high = j.value("p_high", 99.0);
        if (!(m.s1 < m.m_s && m.m_s < m.s2)) throw DataError("PL model needs s1 < m_s < s2");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed PL model: ") + e.what());
    }
}

void PLModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    out << to_json();
    if (!out) throw DataError("cannot write '" + path.string() + "'");
}

PLModel PLModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

// ---------------------------------------------------------------------------

NormalizationSpec NormalizationSpec::parse(std::string_view text) {
    NormalizationSpec spec;
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    const bool has_arg = colon != std::string_view::npos;
    auto no_arg = [&] {
        if (has_arg) throw InvalidArgument("normalization '" + std::string(head) + "' takes no argument");
    };
    if (head == "none") {
        no_arg();
    } else if (head == "minmax") {
        no_arg();
        spec.method = NormMethod::Minmax;
    } else if (head == "cminmax") {
        spec.method = NormMethod::CMinmax;
        if (has_arg) {
            spec.p = parse_number(arg, "cminmax percentile");
            spec.q = 100.0 - spec.p;
            if (!(spec.p >= 0.0 && spec.p < 50.0)) throw InvalidArgument("cminmax percentile must lie in [0, 50)");
        }
    } else if (head == "zscore") {
        no_arg();
        spec.method = NormMethod::Zscore;
    } else if (head == "quantile") {
        no_arg();
        spec.method = NormMethod::Quantile;
    } else if (head == "binning") {
        spec.method = NormMethod::Binning;
        if (has_arg) {
            const double b = parse_number(arg, "bin count");
            if (b < 2 || b != std::floor(b) || b > 1e9) throw InvalidArgument("bin count must be an integer >= 2");
            spec.bins = static_cast<int>(b);
        }
    } else if (head == "pl") {
        if (!has_arg || arg.empty()) throw InvalidArgument("pl normalization needs a model file (pl:<model.json>)");
        spec.method = NormMethod::PL;
        spec.pl = PLModel::load(std::filesystem::path(std::string(arg)));
    } else {
        throw InvalidArgument("unknown normalization '" + std::string(text) +
                              "' (expected none, minmax, cminmax, zscore, quantile, binning or pl:<model>)");
    }
    return spec;
}

std::string NormalizationSpec::name() const {
    switch (method) {
    case NormMethod::None:
        return "none";
    case NormMethod::Minmax:
        return "minmax";
    case NormMethod::CMinmax:
        return "cminmax";
    case NormMethod::Zscore:
        return "zscore";
    case NormMethod::Quantile:
        return "quantile";
    case NormMethod::Binning:
        return "binning";
    case NormMethod::PL:
        return "pl";
    }
    return {};
}

ImageGrid normalize(const ImageGrid& image, const NormalizationSpec& spec) {
    switch (spec.method) {
    case NormMethod::None:
        return image;
    case NormMethod::Minmax:
        return minmax(image, spec.j1, spec.j2);
    case NormMethod::CMinmax:
        return cminmax(image, spec.p, spec.q, spec.j1, spec.j2);
    case NormMethod::Zscore:
        return zscore(image);
    case NormMethod::Quantile:
        return quantile_norm(image);
    case NormMethod::Binning:
        return binning(image, spec.bins);
    case NormMethod::PL:
        if (!spec.pl) throw InvalidArgument("PL normalization without a model");
        return pl_apply(image, *spec.pl);
    }
    throw InvalidArgument("unknown normalization method");
}

} // namespace mrqm
