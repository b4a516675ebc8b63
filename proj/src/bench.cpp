#include "mrqm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <toml.hpp>

#include "mrqm/error.hpp"
#include "mrqm/log.hpp"
#include "mrqm/metrics.hpp"
#include "mrqm/nr_metrics.hpp"
#include "random.hpp"

namespace mrqm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Input {
    std::string id;
    std::optional<ImageGrid> image;
    std::string error;
};

bool is_raster(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    return ext == ".npy" || ext == ".pgm" || ext == ".csv";
}

std::vector<Input> load_inputs(const BenchmarkConfig& config) {
    std::vector<Input> inputs;
    if (!config.input_dir.empty()) {
        std::error_code ec;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(config.input_dir, ec)) {
            if (entry.is_regular_file() && is_raster(entry.path())) files.push_back(entry.path());
        }
        if (ec) throw DataError("cannot read directory " + config.input_dir.string() + ": " + ec.message());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            Input in{f.filename().string(), std::nullopt, {}};
            try {
                in.image = load_raster(f);
            } catch (const std::exception& e) {
                in.error = e.what();
                warn("skipping " + f.string() + ": " + e.what());
            }
            inputs.push_back(std::move(in));
        }
        if (inputs.empty()) throw DataError("no raster files in " + config.input_dir.string());
    } else {
        for (std::size_t i = 0; i < config.phantom_count; ++i) {
            const std::uint64_t s = config.seed + i;
            inputs.push_back({"phantom_" + std::to_string(s), make_phantom(s, config.phantom_size, config.phantom_size), {}});
        }
    }
    return inputs;
}

// Report tag of a normalization entry; a PL model path is reduced to "pl".
std::string norm_tag(const std::string& text) { return text.rfind("pl:", 0) == 0 ? "pl" : text; }

struct Prepared {
    std::vector<const MetricInfo*> metrics;
    std::vector<NormalizationSpec> norms;
    std::vector<std::string> tags;
    std::optional<NiqeModel> niqe;
    std::optional<BrisqueModel> brisque;
    MetricModels models() const { return {niqe ? &*niqe : nullptr, brisque ? &*brisque : nullptr}; }
};

Prepared prepare(const BenchmarkConfig& config) {
    Prepared p;
    for (const auto& m : config.metrics) p.metrics.push_back(&find_metric(m));
    for (const auto& n : config.normalizations) {
        p.norms.push_back(NormalizationSpec::parse(n));
        p.tags.push_back(norm_tag(n));
    }
    for (const auto* m : p.metrics) {
        if (m->name == "niqe") p.niqe = NiqeModel::load(config.niqe_model);
        if (m->name == "brisque") p.brisque = BrisqueModel::load(config.brisque_model);
    }
    for (std::size_t i = 0; i < p.norms.size(); ++i) {
        if (p.norms[i].method != NormMethod::Binning) continue;
        for (const auto* m : p.metrics) {
            if (m->name == "mse" || m->name == "rmse" || m->name == "mae" || m->name == "nmse" || m->name == "psnr") {
                warn("metric " + std::string(m->name) + " under binning is evaluated on bin indices");
            }
        }
    }
    return p;
}

struct WorkItem {
    std::size_t image = 0;
    std::optional<DistortionSpec> spec;  ///< empty for the reference item
    std::size_t strength_index = 0;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_cell(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw DataError("cannot write " + path.string());
}

std::vector<std::string> string_array(const toml::node& node, const std::string& key) {
    const auto* arr = node.as_array();
    if (!arr) throw InvalidArgument("config key '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *arr) {
        const auto s = v.value<std::string>();
        if (!s) throw InvalidArgument("config key '" + key + "' must be an array of strings");
        out.push_back(*s);
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

void BenchmarkConfig::validate() const {
    if (metrics.empty()) throw InvalidArgument("benchmark needs at least one metric");
    if (distortions.empty()) throw InvalidArgument("benchmark needs at least one distortion");
    if (normalizations.empty()) throw InvalidArgument("benchmark needs at least one normalization");
    if (input_dir.empty() && phantom_count == 0) throw InvalidArgument("benchmark needs input_dir or phantom_count");
    if (!input_dir.empty() && phantom_count > 0) throw InvalidArgument("set either input_dir or phantom_count, not both");
    if (strengths.empty()) throw InvalidArgument("benchmark needs at least one strength");
    for (double s : strengths)
        if (!(s >= 1.0 && s <= 5.0)) throw InvalidArgument("strengths must lie in [1, 5]");
    for (const auto& m : metrics) {
        const MetricInfo& info = find_metric(m);
        if (info.name == "niqe" && niqe_model.empty()) throw InvalidArgument("metric niqe needs niqe_model");
        if (info.name == "brisque" && brisque_model.empty()) throw InvalidArgument("metric brisque needs brisque_model");
    }
    for (const auto& n : normalizations) {
        if (n.rfind("pl:", 0) != 0) NormalizationSpec::parse(n);
    }
}

BenchmarkConfig BenchmarkConfig::from_toml(std::string_view text, const std::filesystem::path& base_dir) {
    toml::table tbl;
    try {
        tbl = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "bench config: " << e.description() << " at line " << e.source().begin.line;
        throw DataError(msg.str());
    }
    BenchmarkConfig c;
    c.normalizations.clear();
    bool have_norms = false;
    for (const auto& [key_node, node] : tbl) {
        const std::string key(key_node.str());
        auto str = [&] {
            const auto v = node.value<std::string>();
            if (!v) throw InvalidArgument("config key '" + key + "' must be a string");
            return *v;
        };
        auto integer = [&] {
            const auto v = node.value<std::int64_t>();
            if (!v || *v < 0) throw InvalidArgument("config key '" + key + "' must be a non-negative integer");
            return *v;
        };
        if (key == "input_dir") {
            c.input_dir = resolve(base_dir, str());
        } else if (key == "phantom_count") {
            c.phantom_count = static_cast<std::size_t>(integer());
        } else if (key == "phantom_size") {
            c.phantom_size = static_cast<std::size_t>(integer());
        } else if (key == "metrics") {
            c.metrics = string_array(node, key);
        } else if (key == "normalizations") {
            have_norms = true;
            for (const auto& n : string_array(node, key)) {
                c.normalizations.push_back(n.rfind("pl:", 0) == 0 ? "pl:" + resolve(base_dir, n.substr(3)).string() : n);
            }
        } else if (key == "distortions") {
            c.distortions.clear();
            for (const auto& d : string_array(node, key)) {
                if (d == "all") {
                    c.distortions.assign(kAllDistortions.begin(), kAllDistortions.end());
                } else {
                    c.distortions.push_back(parse_distortion(d));
                }
            }
        } else if (key == "strengths") {
            const auto* arr = node.as_array();
            if (!arr) throw InvalidArgument("config key 'strengths' must be an array of numbers");
            c.strengths.clear();
            for (const auto& v : *arr) {
                const auto d = v.value<double>();
                if (!d) throw InvalidArgument("config key 'strengths' must be an array of numbers");
                c.strengths.push_back(*d);
            }
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(integer());
        } else if (key == "data_range") {
            c.data_range = DataRangeMode::parse(str());
        } else if (key == "output_dir") {
            c.output_dir = resolve(base_dir, str());
        } else if (key == "threads") {
            c.threads = static_cast<unsigned>(integer());
        } else if (key == "niqe_model") {
            c.niqe_model = resolve(base_dir, str());
        } else if (key == "brisque_model") {
            c.brisque_model = resolve(base_dir, str());
        } else {
            throw InvalidArgument("unknown config key '" + key + "'");
        }
    }
    if (!have_norms) c.normalizations = {"none"};
    c.validate();
    return c;
}

BenchmarkConfig BenchmarkConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_toml(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& config) {
    config.validate();
    const Prepared prep = prepare(config);
    const std::vector<Input> inputs = load_inputs(config);

    // Dataset mode: one range per normalization over all normalized references.
    std::vector<DataRangeMode> modes(prep.norms.size(), config.data_range);
    if (config.data_range.kind == DataRangeKind::Dataset) {
        for (std::size_t n = 0; n < prep.norms.size(); ++n) {
            std::vector<ImageGrid> normalized;
            for (const auto& in : inputs)
                if (in.image) normalized.push_back(normalize(*in.image, prep.norms[n]));
            std::vector<const ImageGrid*> ptrs;
            for (const auto& img : normalized) ptrs.push_back(&img);
            try {
                modes[n] = DataRangeMode::fixed(resolve_data_range(config.data_range, ptrs));
            } catch (const Error& e) {
                warn("dataset range for " + prep.tags[n] + ": " + e.what());
            }
        }
    }

    bool any_nr = false;
    for (const auto* m : prep.metrics) any_nr = any_nr || !m->needs_reference;

    std::vector<WorkItem> items;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!inputs[i].image) continue;
        const std::uint64_t image_seed = config.seed ^ detail::mix64(0x9e3779b97f4a7c15ULL + i);
        if (any_nr) items.push_back({i, std::nullopt, 0});
        for (DistortionKind kind : config.distortions) {
            for (std::size_t s = 0; s < config.strengths.size(); ++s) {
                items.push_back({i, DistortionSpec{kind, config.strengths[s], sweep_seed(image_seed, kind, s)}, s});
            }
        }
    }

    std::vector<std::vector<ResultRow>> slots(items.size());
    auto process = [&](const WorkItem& item, std::vector<ResultRow>& out) {
        const Input& in = inputs[item.image];
        const ImageGrid& reference = *in.image;
        std::optional<ImageGrid> distorted;
        std::string distort_error;
        if (item.spec) {
            try {
                distorted = apply_distortion(reference, *item.spec);
            } catch (const std::exception& e) {
                distort_error = e.what();
            }
        }
        const std::string dname = item.spec ? std::string(distortion_name(item.spec->kind)) : std::string(kReferenceRow);
        const double strength = item.spec ? item.spec->strength : 0.0;
        for (std::size_t n = 0; n < prep.norms.size(); ++n) {
            std::optional<ImageGrid> nref, nimg;
            std::string norm_error = distort_error;
            if (norm_error.empty()) {
                try {
                    nref = normalize(reference, prep.norms[n]);
                    nimg = item.spec ? normalize(*distorted, prep.norms[n]) : *nref;
                } catch (const std::exception& e) {
                    norm_error = e.what();
                }
            }
            for (const MetricInfo* m : prep.metrics) {
                if (!item.spec && m->needs_reference) continue;
                ResultRow row{in.id, dname, strength, prep.tags[n], std::string(m->name), kNaN, {}};
                if (!norm_error.empty()) {
                    row.error = norm_error;
                } else {
                    try {
                        row.score = evaluate_metric(*m, *nimg, &*nref, modes[n], prep.models());
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                }
                out.push_back(std::move(row));
            }
        }
    };

    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, items.size()))));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < items.size(); i = next++) process(items[i], slots[i]);
            } catch (...) {
                failures[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    std::vector<ResultRow> rows;
    for (const auto& in : inputs) {
        if (!in.image) rows.push_back({in.id, "", 0.0, "", "", kNaN, in.error});
    }
    for (auto& slot : slots)
        for (auto& r : slot) rows.push_back(std::move(r));
    return rows;
}

double median_with_infinity(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    const double a = values[n / 2 - 1], b = values[n / 2];
    if (std::isinf(a) && std::isinf(b)) return a == b ? a : std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(a)) return b;
    if (std::isinf(b)) return a;
    return 0.5 * (a + b);
}

std::vector<TableCell> aggregate(std::span<const ResultRow> rows, std::span<const std::string> normalizations) {
    if (rows.empty()) throw InvalidArgument("cannot aggregate an empty row set");
    std::vector<std::string> distortions;
    for (DistortionKind k : kAllDistortions) distortions.emplace_back(distortion_name(k));
    distortions.emplace_back(kReferenceRow);
    auto index_of = [](const auto& list, const std::string& v) {
        return static_cast<std::size_t>(std::find(list.begin(), list.end(), v) - list.begin());
    };
    std::vector<std::string> metric_names;
    for (const auto& m : metric_registry()) metric_names.emplace_back(m.name);
    std::vector<std::string> norm_tags;
    for (const auto& n : normalizations) norm_tags.push_back(norm_tag(n));

    using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
    std::map<Key, std::vector<double>> groups;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> pooled;
    for (const auto& r : rows) {
        if (!r.error.empty() || r.metric.empty() || std::isnan(r.score)) continue;
        const std::size_t d = index_of(distortions, r.distortion);
        const std::size_t m = index_of(metric_names, r.metric);
        const std::size_t n = index_of(norm_tags, r.normalization);
        if (d == distortions.size() || m == metric_names.size() || n == norm_tags.size()) continue;
        groups[{d, m, n}].push_back(r.score);
        if (distortions[d] != kReferenceRow) pooled[{m, n}].push_back(r.score);
    }

    std::map<std::pair<std::size_t, std::size_t>, double> pooled_median;
    for (auto& [k, v] : pooled) pooled_median[k] = median_with_infinity(v);

    std::vector<TableCell> cells;
    for (const auto& [key, values] : groups) {
        const auto [d, m, n] = key;
        TableCell cell{distortions[d], metric_names[m], norm_tags[n], median_with_infinity(values), values.size(), {}, 0.0};
        const auto p = pooled_median.find({m, n});
        if (p != pooled_median.end() && p->second != 0.0 && std::isfinite(p->second)) {
            cell.relative = cell.median / p->second;
        }
        cells.push_back(cell);
    }

    // Shading per (metric, normalization) column over the distortion rows.
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
        const bool higher = metric_registry()[m].higher_is_better;
        for (std::size_t n = 0; n < norm_tags.size(); ++n) {
            double best = std::numeric_limits<double>::quiet_NaN(), worst = best;
            for (const auto& c : cells) {
                if (c.metric != metric_names[m] || c.normalization != norm_tags[n] || c.distortion == kReferenceRow) continue;
                if (!std::isfinite(c.median)) continue;
                if (std::isnan(best) || (higher ? c.median > best : c.median < best)) best = c.median;
                if (std::isnan(worst) || (higher ? c.median < worst : c.median > worst)) worst = c.median;
            }
            for (auto& c : cells) {
                if (c.metric != metric_names[m] || c.normalization != norm_tags[n] || c.distortion == kReferenceRow) continue;
                if (std::isinf(c.median)) {
                    c.shading = (c.median > 0) == higher ? 0.0 : 1.0;
                } else if (best != worst) {
                    c.shading = std::abs(best - c.median) / std::abs(best - worst);
                }
            }
        }
    }
    return cells;
}

std::string rows_csv(std::span<const ResultRow> rows) {
    std::string out = "image,distortion,strength,normalization,metric,score,error\n";
    for (const auto& r : rows) {
        out += csv_field(r.image_id) + "," + r.distortion + "," + format_double(r.strength) + "," + r.normalization +
               "," + r.metric + "," + (std::isnan(r.score) ? std::string() : format_double(r.score)) + "," +
               csv_field(r.error) + "\n";
    }
    return out;
}

std::string medians_csv(std::span<const TableCell> cells) {
    std::string out = "distortion,metric,normalization,median,relative\n";
    for (const auto& c : cells) {
        out += c.distortion + "," + c.metric + "," + c.normalization + "," + format_double(c.median) + "," +
               (c.relative ? format_double(*c.relative) : std::string()) + "\n";
    }
    return out;
}

std::string relative_csv(std::span<const TableCell> cells) {
    std::vector<std::string> metrics, norms, distortions;
    auto add = [](std::vector<std::string>& list, const std::string& v) {
        if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
    };
    for (const auto& c : cells) {
        add(distortions, c.distortion);
        add(norms, c.normalization);
    }
    for (const auto& m : metric_registry()) {
        for (const auto& c : cells) {
            if (c.metric == m.name) {
                add(metrics, c.metric);
                break;
            }
        }
    }
    std::string out = "distortion,normalization";
    for (const auto& m : metrics) out += "," + m;
    out += "\n";
    for (const auto& n : norms) {
        for (const auto& d : distortions) {
            std::string line = d + "," + n;
            bool any = false;
            for (const auto& m : metrics) {
                line += ",";
                for (const auto& c : cells) {
                    if (c.distortion == d && c.normalization == n && c.metric == m) {
                        any = true;
                        if (c.relative) line += format_double(*c.relative);
                    }
                }
            }
            if (any) out += line + "\n";
        }
    }
    return out;
}

std::string table_markdown(std::span<const TableCell> cells) {
    std::vector<std::string> norms;
    for (const auto& c : cells)
        if (std::find(norms.begin(), norms.end(), c.normalization) == norms.end()) norms.push_back(c.normalization);
    std::string out;
    for (const auto& n : norms) {
        std::vector<const MetricInfo*> metrics;
        std::vector<std::string> distortions;
        for (const auto& m : metric_registry()) {
            for (const auto& c : cells) {
                if (c.normalization == n && c.metric == m.name) {
                    metrics.push_back(&m);
                    break;
                }
            }
        }
        for (const auto& c : cells) {
            if (c.normalization == n && std::find(distortions.begin(), distortions.end(), c.distortion) == distortions.end())
                distortions.push_back(c.distortion);
        }
        if (!out.empty()) out += "\n";
        out += "### Normalization: " + n + "\n\nMedian [shading, 1 = most sensitive]\n\n| Distortion |";
        for (const auto* m : metrics) out += " " + std::string(m->name) + (m->higher_is_better ? " ↑" : " ↓") + " |";
        out += "\n|---|";
        for (std::size_t i = 0; i < metrics.size(); ++i) out += "---:|";
        out += "\n";
        for (const auto& d : distortions) {
            out += "| " + d + " |";
            for (const auto* m : metrics) {
                out += " ";
                for (const auto& c : cells) {
                    if (c.normalization == n && c.distortion == d && c.metric == m->name) {
                        char shade[16];
                        std::snprintf(shade, sizeof(shade), "%.2f", c.shading);
                        out += format_cell(c.median) + (d == kReferenceRow ? "" : " [" + std::string(shade) + "]");
                    }
                }
                out += " |";
            }
            out += "\n";
        }
    }
    return out;
}

std::vector<TableCell> run_and_write(const BenchmarkConfig& config) {
    const auto rows = run_benchmark(config);
    std::vector<TableCell> cells;
    bool any_valid = false;
    for (const auto& r : rows) any_valid = any_valid || (r.error.empty() && !r.metric.empty());
    if (any_valid) cells = aggregate(rows, config.normalizations);
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw DataError("cannot create " + config.output_dir.string() + ": " + ec.message());
    write_file(config.output_dir / "rows.csv", rows_csv(rows));
    write_file(config.output_dir / "medians.csv", medians_csv(cells));
    write_file(config.output_dir / "relative.csv", relative_csv(cells));
    write_file(config.output_dir / "table.md", table_markdown(cells));
    return cells;
}

} // namespace mrqm
