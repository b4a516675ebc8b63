#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mrqm/mrqm.h"

namespace {

// Status-carrying failure; the exit code follows the status class.
struct Failure {
    mrqm_status status;
    std::string message;
};

void check(mrqm_status s) {
    if (s != MRQM_OK) throw Failure{s, mrqm_last_error()};
}

int exit_code(mrqm_status s) {
    switch (s) {
    case MRQM_OK:
        return 0;
    case MRQM_ERR_INVALID_ARGUMENT:
        return 1;
    case MRQM_ERR_DEGENERATE:
        return 3;
    default:
        return 2;
    }
}

struct ImageDeleter {
    void operator()(mrqm_image* p) const { mrqm_image_free(p); }
};
struct NiqeDeleter {
    void operator()(mrqm_niqe_model* p) const { mrqm_niqe_free(p); }
};
struct BrisqueDeleter {
    void operator()(mrqm_brisque_model* p) const { mrqm_brisque_free(p); }
};
struct PlDeleter {
    void operator()(mrqm_pl_model* p) const { mrqm_pl_free(p); }
};
using Image = std::unique_ptr<mrqm_image, ImageDeleter>;

Image load(const std::string& path) {
    mrqm_image* p = nullptr;
    check(mrqm_image_load(path.c_str(), &p));
    return Image(p);
}

Image normalized(const mrqm_image* image, const std::string& spec) {
    mrqm_image* p = nullptr;
    check(mrqm_normalize(image, spec.c_str(), &p));
    return Image(p);
}

std::string format(double v) {
    char buf[64];
    size_t needed = 0;
    check(mrqm_format_double(v, buf, sizeof(buf), &needed));
    return buf;
}

std::vector<std::string> split(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string norm_tag(const std::string& spec) { return spec.rfind("pl:", 0) == 0 ? "pl" : spec; }

std::vector<Image> load_all(const std::vector<std::string>& paths) {
    std::vector<Image> out;
    for (const auto& p : paths) out.push_back(load(p));
    return out;
}

std::vector<const mrqm_image*> raw(const std::vector<Image>& images) {
    std::vector<const mrqm_image*> out;
    for (const auto& i : images) out.push_back(i.get());
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MR image quality metrics: normalization, distortions, metrics and benchmarks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mrqm_version()));

    std::uint64_t seed = 0;
    std::string data_range = "pair";
    std::string norm = "none";

    // phantom
    auto* phantom = app.add_subcommand("phantom", "Write a synthetic brain-like phantom");
    std::size_t width = 240, height = 240;
    std::string out, mask_out;
    phantom->add_option("--seed", seed, "Phantom seed");
    phantom->add_option("--width", width, "Width in pixels")->capture_default_str();
    phantom->add_option("--height", height, "Height in pixels")->capture_default_str();
    phantom->add_option("--out", out, "Output raster (.npy, .pgm, .csv)")->required();
    phantom->add_option("--mask", mask_out, "Also write the lesion mask");

    // normalize
    auto* normalize = app.add_subcommand("normalize", "Normalize a raster");
    std::string in;
    normalize->add_option("--in", in, "Input raster")->required();
    normalize->add_option("--norm", norm, "none|minmax|cminmax[:p]|zscore|quantile|binning[:B]|pl:<model>")->required();
    normalize->add_option("--out", out, "Output raster")->required();

    // pl-fit
    auto* pl_fit = app.add_subcommand("pl-fit", "Fit a piecewise-linear standardization model");
    std::vector<std::string> inputs;
    double p_low = 1.0, p_high = 99.0;
    pl_fit->add_option("inputs", inputs, "Training rasters")->required();
    pl_fit->add_option("--p-low", p_low, "Lower landmark percentile")->capture_default_str();
    pl_fit->add_option("--p-high", p_high, "Upper landmark percentile")->capture_default_str();
    pl_fit->add_option("--out", out, "Model file (JSON)")->required();

    // distort
    auto* distort = app.add_subcommand("distort", "Apply a distortion");
    std::string kind;
    double strength = 1.0;
    distort->add_option("--in", in, "Input raster")->required();
    distort->add_option("--kind", kind, "Distortion, e.g. GaussianBlur or gaussian-blur")->required();
    distort->add_option("--strength", strength, "Strength in [1, 5]")->capture_default_str();
    distort->add_option("--seed", seed, "Random seed");
    distort->add_option("--out", out, "Output raster")->required();

    // metric
    auto* metric = app.add_subcommand("metric", "Evaluate metrics; one CSV row per metric on stdout");
    std::string img, ref, metrics, niqe_path, brisque_path;
    bool header = false;
    metric->add_option("--img", img, "Image to assess")->required();
    metric->add_option("--ref", ref, "Reference image (reference metrics)");
    metric->add_option("--metrics", metrics, "Comma separated metric names")->required();
    metric->add_option("--norm", norm, "Normalization applied to each image independently")->capture_default_str();
    metric->add_option("--data-range", data_range, "per-image|pair|dataset|fixed:<v>")->capture_default_str();
    metric->add_option("--niqe-model", niqe_path, "NIQE model file");
    metric->add_option("--brisque-model", brisque_path, "BRISQUE regressor file");
    metric->add_flag("--header", header, "Print the CSV header first");

    // dsc
    auto* dsc = app.add_subcommand("dsc", "Dice similarity of two label rasters");
    std::string mask_a, mask_b;
    int class_id = -1;
    double epsilon = 1e-7;
    dsc->add_option("--a", mask_a, "First label raster")->required();
    dsc->add_option("--b", mask_b, "Second label raster")->required();
    dsc->add_option("--class", class_id, "Class id; -1 = any non-zero label")->capture_default_str();
    dsc->add_option("--epsilon", epsilon, "Smoothing term")->capture_default_str();

    // niqe-fit
    auto* niqe_fit = app.add_subcommand("niqe-fit", "Fit a NIQE model to pristine images");
    std::size_t patch = 96, phantoms = 0;
    double percentile = 75.0;
    unsigned threads = 0;
    niqe_fit->add_option("inputs", inputs, "Pristine rasters");
    niqe_fit->add_option("--phantoms", phantoms, "Fit to this many phantoms (seeds --seed, --seed + 1, ...)");
    niqe_fit->add_option("--seed", seed, "First phantom seed");
    niqe_fit->add_option("--patch", patch, "Patch size")->capture_default_str();
    niqe_fit->add_option("--percentile", percentile, "Sharpness percentile for patch selection (0 keeps all)")
        ->capture_default_str();
    niqe_fit->add_option("--threads", threads, "Worker threads (0 = all cores)");
    niqe_fit->add_option("--out", out, "Model file")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Run a benchmark sweep from a TOML config");
    std::string config, out_dir;
    bench->add_option("--config", config, "Benchmark config (TOML)")->required();
    bench->add_option("--out", out_dir, "Override the output directory");
    bench->add_option("--threads", threads, "Override the worker count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::fputs(app.help().c_str(), stderr);
        return 1;
    }

    try {
        if (*phantom) {
            mrqm_image* p = nullptr;
            check(mrqm_phantom(seed, width, height, &p));
            Image image(p);
            check(mrqm_image_save(image.get(), out.c_str()));
            if (!mask_out.empty()) {
                mrqm_image* m = nullptr;
                check(mrqm_phantom_lesion_mask(seed, width, height, &m));
                Image mask(m);
                check(mrqm_image_save(mask.get(), mask_out.c_str()));
            }
        } else if (*normalize) {
            const Image image = load(in);
            check(mrqm_image_save(normalized(image.get(), norm).get(), out.c_str()));
        } else if (*pl_fit) {
            const auto images = load_all(inputs);
            const auto ptrs = raw(images);
            mrqm_pl_model* m = nullptr;
            check(mrqm_pl_fit(ptrs.data(), ptrs.size(), p_low, p_high, &m));
            std::unique_ptr<mrqm_pl_model, PlDeleter> model(m);
            check(mrqm_pl_save(model.get(), out.c_str()));
        } else if (*distort) {
            const Image image = load(in);
            mrqm_image* d = nullptr;
            check(mrqm_distort(image.get(), kind.c_str(), strength, seed, &d));
            Image result(d);
            check(mrqm_image_save(result.get(), out.c_str()));
        } else if (*metric) {
            const auto names = split(metrics);
            if (names.empty()) throw Failure{MRQM_ERR_INVALID_ARGUMENT, "--metrics lists no metric"};
            std::vector<int> higher;
            bool needs_ref = false;
            for (const auto& n : names) {
                size_t index = 0;
                check(mrqm_metric_find(n.c_str(), &index));
                int nr = 0, hb = 0;
                check(mrqm_metric_info(index, nullptr, &nr, &hb));
                needs_ref = needs_ref || nr;
                higher.push_back(hb);
            }
            if (needs_ref && ref.empty()) throw Failure{MRQM_ERR_INVALID_ARGUMENT, "reference metrics need --ref"};
            std::unique_ptr<mrqm_niqe_model, NiqeDeleter> niqe;
            std::unique_ptr<mrqm_brisque_model, BrisqueDeleter> brisque;
            if (!niqe_path.empty()) {
                mrqm_niqe_model* m = nullptr;
                check(mrqm_niqe_load(niqe_path.c_str(), &m));
                niqe.reset(m);
            }
            if (!brisque_path.empty()) {
                mrqm_brisque_model* m = nullptr;
                check(mrqm_brisque_load(brisque_path.c_str(), &m));
                brisque.reset(m);
            }
            const Image image = normalized(load(img).get(), norm);
            Image reference;
            if (!ref.empty()) reference = normalized(load(ref).get(), norm);
            // Evaluate everything before printing so a failure leaves stdout empty.
            std::string payload;
            if (header) payload += "metric,score,orientation,data_range_mode,normalization\n";
            for (std::size_t i = 0; i < names.size(); ++i) {
                double score = 0.0;
                check(mrqm_metric(names[i].c_str(), image.get(), reference.get(), data_range.c_str(), niqe.get(),
                                  brisque.get(), &score));
                payload += names[i] + "," + format(score) + "," + (higher[i] ? "higher" : "lower") + "," + data_range +
                           "," + norm_tag(norm) + "\n";
            }
            std::fputs(payload.c_str(), stdout);
        } else if (*dsc) {
            const Image a = load(mask_a);
            const Image b = load(mask_b);
            double score = 0.0;
            check(mrqm_dsc(a.get(), b.get(), class_id, epsilon, &score));
            std::printf("dsc,%s,higher,,\n", format(score).c_str());
        } else if (*niqe_fit) {
            std::vector<Image> images;
            if (phantoms > 0) {
                if (!inputs.empty()) throw Failure{MRQM_ERR_INVALID_ARGUMENT, "give either input files or --phantoms"};
                for (std::size_t i = 0; i < phantoms; ++i) {
                    mrqm_image* p = nullptr;
                    check(mrqm_phantom(seed + i, 240, 240, &p));
                    images.emplace_back(p);
                }
            } else {
                images = load_all(inputs);
            }
            const auto ptrs = raw(images);
            mrqm_niqe_model* m = nullptr;
            check(mrqm_niqe_fit(ptrs.data(), ptrs.size(), patch, percentile, threads, &m));
            std::unique_ptr<mrqm_niqe_model, NiqeDeleter> model(m);
            check(mrqm_niqe_save(model.get(), out.c_str()));
        } else if (*bench) {
            check(mrqm_bench_run(config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), threads));
        }
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
        if (f.status == MRQM_ERR_INVALID_ARGUMENT) std::fputs("run with --help for usage\n", stderr);
        return exit_code(f.status);
    }
    return 0;
}
