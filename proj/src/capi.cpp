#include "mrqm/mrqm.h"

#include <cstdio>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "mrqm/bench.hpp"
#include "mrqm/distort.hpp"
#include "mrqm/error.hpp"
#include "mrqm/log.hpp"
#include "mrqm/metrics.hpp"
#include "mrqm/normalize.hpp"
#include "mrqm/nr_metrics.hpp"
#include "mrqm/ref_metrics.hpp"

struct mrqm_image {
    mrqm::ImageGrid grid;
};

struct mrqm_niqe_model {
    mrqm::NiqeModel model;
};

struct mrqm_brisque_model {
    mrqm::BrisqueModel model;
};

struct mrqm_pl_model {
    mrqm::PLModel model;
};

namespace {

thread_local std::string last_error;

mrqm_status fail(mrqm_status status, const char* message) {
    last_error = message;
    return status;
}

// Runs f, translating exceptions into status codes.
template <class F>
mrqm_status guarded(F&& f) {
    try {
        f();
        return MRQM_OK;
    } catch (const mrqm::Error& e) {
        switch (e.kind()) {
        case mrqm::ErrorKind::InvalidArgument:
            return fail(MRQM_ERR_INVALID_ARGUMENT, e.what());
        case mrqm::ErrorKind::Data:
            return fail(MRQM_ERR_DATA, e.what());
        case mrqm::ErrorKind::Degenerate:
            return fail(MRQM_ERR_DEGENERATE, e.what());
        }
        return fail(MRQM_ERR_INTERNAL, e.what());
    } catch (const std::bad_alloc&) {
        return fail(MRQM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(MRQM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(MRQM_ERR_INTERNAL, "unknown error");
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw mrqm::InvalidArgument(std::string(what) + " must not be NULL");
}

mrqm_image* wrap(mrqm::ImageGrid grid) { return new mrqm_image{std::move(grid)}; }

std::vector<mrqm::ImageGrid> collect(const mrqm_image* const* images, std::size_t count) {
    if (count > 0) require(images, "images");
    std::vector<mrqm::ImageGrid> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        require(images[i], "image");
        out.push_back(images[i]->grid);
    }
    return out;
}

} // namespace

extern "C" {

const char* mrqm_version(void) { return "0.1.0"; }

const char* mrqm_last_error(void) { return last_error.c_str(); }

void mrqm_set_warning_handler(mrqm_warning_fn fn, void* user) {
    if (fn == nullptr) {
        mrqm::set_warning_sink([](std::string_view m) {
            std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(m.size()), m.data());
        });
    } else {
        mrqm::set_warning_sink([fn, user](std::string_view m) { fn(std::string(m).c_str(), user); });
    }
}

mrqm_status mrqm_format_double(double value, char* buffer, size_t size, size_t* needed) {
    return guarded([&] {
        const std::string text = mrqm::format_double(value);
        if (needed) *needed = text.size();
        if (size == 0) return;
        require(buffer, "buffer");
        const std::size_t n = std::min(size - 1, text.size());
        std::memcpy(buffer, text.data(), n);
        buffer[n] = '\0';
    });
}

mrqm_status mrqm_image_create(size_t width, size_t height, const double* data, mrqm_image** out) {
    return guarded([&] {
        require(out, "out");
        if (width * height > 0) require(data, "data");
        *out = wrap(mrqm::ImageGrid(width, height, std::vector<double>(data, data + width * height)));
    });
}

mrqm_status mrqm_image_load(const char* path, mrqm_image** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = wrap(mrqm::load_raster(path));
    });
}

mrqm_status mrqm_image_save(const mrqm_image* image, const char* path) {
    return guarded([&] {
        require(image, "image");
        require(path, "path");
        mrqm::save_raster(image->grid, path);
    });
}

mrqm_status mrqm_image_size(const mrqm_image* image, size_t* width, size_t* height) {
    return guarded([&] {
        require(image, "image");
        if (width) *width = image->grid.width();
        if (height) *height = image->grid.height();
    });
}

mrqm_status mrqm_image_data(const mrqm_image* image, const double** data) {
    return guarded([&] {
        require(image, "image");
        require(data, "data");
        *data = image->grid.values().data();
    });
}

void mrqm_image_free(mrqm_image* image) { delete image; }

mrqm_status mrqm_phantom(uint64_t seed, size_t width, size_t height, mrqm_image** out) {
    return guarded([&] {
        require(out, "out");
        *out = wrap(mrqm::make_phantom(seed, width, height));
    });
}

mrqm_status mrqm_phantom_lesion_mask(uint64_t seed, size_t width, size_t height, mrqm_image** out) {
    return guarded([&] {
        require(out, "out");
        const mrqm::LabelMask mask = mrqm::make_phantom_lesion_mask(seed, width, height);
        std::vector<double> v(mask.labels().begin(), mask.labels().end());
        *out = wrap(mrqm::ImageGrid(width, height, std::move(v)));
    });
}

mrqm_status mrqm_normalize(const mrqm_image* image, const char* spec, mrqm_image** out) {
    return guarded([&] {
        require(image, "image");
        require(spec, "spec");
        require(out, "out");
        *out = wrap(mrqm::normalize(image->grid, mrqm::NormalizationSpec::parse(spec)));
    });
}

mrqm_status mrqm_pl_fit(const mrqm_image* const* images, size_t count, double p_low, double p_high,
                        mrqm_pl_model** out) {
    return guarded([&] {
        require(out, "out");
        const auto grids = collect(images, count);
        *out = new mrqm_pl_model{mrqm::pl_fit(grids, p_low, p_high)};
    });
}

mrqm_status mrqm_pl_save(const mrqm_pl_model* model, const char* path) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        model->model.save(path);
    });
}

mrqm_status mrqm_pl_load(const char* path, mrqm_pl_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new mrqm_pl_model{mrqm::PLModel::load(path)};
    });
}

mrqm_status mrqm_pl_apply(const mrqm_image* image, const mrqm_pl_model* model, mrqm_image** out) {
    return guarded([&] {
        require(image, "image");
        require(model, "model");
        require(out, "out");
        *out = wrap(mrqm::pl_apply(image->grid, model->model));
    });
}

void mrqm_pl_free(mrqm_pl_model* model) { delete model; }

mrqm_status mrqm_distort(const mrqm_image* image, const char* kind, double strength, uint64_t seed,
                         mrqm_image** out) {
    return guarded([&] {
        require(image, "image");
        require(kind, "kind");
        require(out, "out");
        *out = wrap(mrqm::apply_distortion(image->grid, {mrqm::parse_distortion(kind), strength, seed}));
    });
}

size_t mrqm_distortion_count(void) { return mrqm::kAllDistortions.size(); }

const char* mrqm_distortion_name(size_t index) {
    if (index >= mrqm::kAllDistortions.size()) return nullptr;
    // distortion_name views static storage with a terminator.
    return mrqm::distortion_name(mrqm::kAllDistortions[index]).data();
}

size_t mrqm_metric_count(void) { return mrqm::metric_registry().size(); }

mrqm_status mrqm_metric_info(size_t index, const char** name, int* needs_reference, int* higher_is_better) {
    return guarded([&] {
        const auto registry = mrqm::metric_registry();
        if (index >= registry.size()) throw mrqm::InvalidArgument("metric index out of range");
        const auto& m = registry[index];
        if (name) *name = m.name.data();
        if (needs_reference) *needs_reference = m.needs_reference ? 1 : 0;
        if (higher_is_better) *higher_is_better = m.higher_is_better ? 1 : 0;
    });
}

mrqm_status mrqm_metric_find(const char* name, size_t* index) {
    return guarded([&] {
        require(name, "name");
        require(index, "index");
        const auto& m = mrqm::find_metric(name);
        *index = static_cast<std::size_t>(&m - mrqm::metric_registry().data());
    });
}

mrqm_status mrqm_metric(const char* name, const mrqm_image* image, const mrqm_image* reference,
                        const char* data_range, const mrqm_niqe_model* niqe, const mrqm_brisque_model* brisque,
                        double* score) {
    return guarded([&] {
        require(name, "name");
        require(image, "image");
        require(score, "score");
        const auto mode = data_range ? mrqm::DataRangeMode::parse(data_range) : mrqm::DataRangeMode::pair();
        const mrqm::MetricModels models{niqe ? &niqe->model : nullptr, brisque ? &brisque->model : nullptr};
        *score = mrqm::evaluate_metric(mrqm::find_metric(name), image->grid, reference ? &reference->grid : nullptr,
                                       mode, models);
    });
}

mrqm_status mrqm_dsc(const mrqm_image* a, const mrqm_image* b, int class_id, double epsilon, double* score) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(score, "score");
        *score = mrqm::dsc(mrqm::LabelMask::from_image(a->grid), mrqm::LabelMask::from_image(b->grid),
                           class_id < 0 ? mrqm::kTotalForeground : class_id, epsilon);
    });
}

mrqm_status mrqm_niqe_fit(const mrqm_image* const* images, size_t count, size_t patch, double sharpness_percentile,
                          unsigned threads, mrqm_niqe_model** out) {
    return guarded([&] {
        require(out, "out");
        const auto grids = collect(images, count);
        mrqm::NiqeFitParams params;
        params.patch = patch;
        params.sharpness_percentile = sharpness_percentile;
        params.threads = threads;
        *out = new mrqm_niqe_model{mrqm::niqe_fit(grids, params)};
    });
}

mrqm_status mrqm_niqe_save(const mrqm_niqe_model* model, const char* path) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        model->model.save(path);
    });
}

mrqm_status mrqm_niqe_load(const char* path, mrqm_niqe_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new mrqm_niqe_model{mrqm::NiqeModel::load(path)};
    });
}

void mrqm_niqe_free(mrqm_niqe_model* model) { delete model; }

mrqm_status mrqm_brisque_load(const char* path, mrqm_brisque_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new mrqm_brisque_model{mrqm::BrisqueModel::load(path)};
    });
}

void mrqm_brisque_free(mrqm_brisque_model* model) { delete model; }

mrqm_status mrqm_bench_run(const char* config_path, const char* output_dir, unsigned threads) {
    return guarded([&] {
        require(config_path, "config_path");
        auto config = mrqm::BenchmarkConfig::load(config_path);
        if (output_dir) config.output_dir = output_dir;
        if (threads) config.threads = threads;
        mrqm::run_and_write(config);
    });
}

} // extern "C"
