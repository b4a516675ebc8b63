/* C interface of the mrqm library. Every function returns an mrqm_status;
 * on failure mrqm_last_error() describes the problem (thread-local, valid
 * until the next failing call on the same thread). Handles are opaque and
 * released with their matching *_free function; free functions accept NULL. */
#ifndef MRQM_H
#define MRQM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MRQM_API __declspec(dllexport)
#else
#define MRQM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mrqm_status {
    MRQM_OK = 0,
    MRQM_ERR_INVALID_ARGUMENT = 1, /* bad parameter, unknown name, size mismatch */
    MRQM_ERR_DATA = 2,             /* unreadable or malformed file, non-finite data */
    MRQM_ERR_DEGENERATE = 3,       /* quantity undefined for this input */
    MRQM_ERR_INTERNAL = 4          /* out of memory or an unexpected failure */
} mrqm_status;

typedef struct mrqm_image mrqm_image;
typedef struct mrqm_niqe_model mrqm_niqe_model;
typedef struct mrqm_brisque_model mrqm_brisque_model;
typedef struct mrqm_pl_model mrqm_pl_model;

MRQM_API const char* mrqm_version(void);
MRQM_API const char* mrqm_last_error(void);

/* Receives library warnings; NULL restores the default (stderr). */
typedef void (*mrqm_warning_fn)(const char* message, void* user);
MRQM_API void mrqm_set_warning_handler(mrqm_warning_fn fn, void* user);

/* Shortest round-trip decimal text of a value ("1.0", "inf"). Writes at most
 * size bytes including the terminator; *needed receives the full length. */
MRQM_API mrqm_status mrqm_format_double(double value, char* buffer, size_t size, size_t* needed);

/* Images: row-major float64. */
MRQM_API mrqm_status mrqm_image_create(size_t width, size_t height, const double* data, mrqm_image** out);
MRQM_API mrqm_status mrqm_image_load(const char* path, mrqm_image** out);
/* Format from the extension: .npy, .pgm or .csv. */
MRQM_API mrqm_status mrqm_image_save(const mrqm_image* image, const char* path);
MRQM_API mrqm_status mrqm_image_size(const mrqm_image* image, size_t* width, size_t* height);
MRQM_API mrqm_status mrqm_image_data(const mrqm_image* image, const double** data);
MRQM_API void mrqm_image_free(mrqm_image* image);

MRQM_API mrqm_status mrqm_phantom(uint64_t seed, size_t width, size_t height, mrqm_image** out);
MRQM_API mrqm_status mrqm_phantom_lesion_mask(uint64_t seed, size_t width, size_t height, mrqm_image** out);

/* spec: "none", "minmax", "cminmax[:p]", "zscore", "quantile", "binning[:B]", "pl:<model.json>". */
MRQM_API mrqm_status mrqm_normalize(const mrqm_image* image, const char* spec, mrqm_image** out);
MRQM_API mrqm_status mrqm_pl_fit(const mrqm_image* const* images, size_t count, double p_low, double p_high,
                                 mrqm_pl_model** out);
MRQM_API mrqm_status mrqm_pl_save(const mrqm_pl_model* model, const char* path);
MRQM_API mrqm_status mrqm_pl_load(const char* path, mrqm_pl_model** out);
MRQM_API mrqm_status mrqm_pl_apply(const mrqm_image* image, const mrqm_pl_model* model, mrqm_image** out);
MRQM_API void mrqm_pl_free(mrqm_pl_model* model);

/* kind: distortion name such as "GaussianBlur" or "gaussian-blur"; strength in [1, 5]. */
MRQM_API mrqm_status mrqm_distort(const mrqm_image* image, const char* kind, double strength, uint64_t seed,
                                  mrqm_image** out);
MRQM_API size_t mrqm_distortion_count(void);
MRQM_API const char* mrqm_distortion_name(size_t index);

/* Metric registry. */
MRQM_API size_t mrqm_metric_count(void);
MRQM_API mrqm_status mrqm_metric_info(size_t index, const char** name, int* needs_reference,
                                      int* higher_is_better);
MRQM_API mrqm_status mrqm_metric_find(const char* name, size_t* index);

/* Evaluates a metric. reference may be NULL for non-reference metrics;
 * data_range is "per-image", "pair", "dataset" or "fixed:<v>" (NULL = pair).
 * niqe / brisque are only needed by the metrics of the same name. */
MRQM_API mrqm_status mrqm_metric(const char* name, const mrqm_image* image, const mrqm_image* reference,
                                 const char* data_range, const mrqm_niqe_model* niqe,
                                 const mrqm_brisque_model* brisque, double* score);

/* DSC of two label images with integral values; class_id < 0 means any non-zero label. */
MRQM_API mrqm_status mrqm_dsc(const mrqm_image* a, const mrqm_image* b, int class_id, double epsilon, double* score);

MRQM_API mrqm_status mrqm_niqe_fit(const mrqm_image* const* images, size_t count, size_t patch,
                                   double sharpness_percentile, unsigned threads, mrqm_niqe_model** out);
MRQM_API mrqm_status mrqm_niqe_save(const mrqm_niqe_model* model, const char* path);
MRQM_API mrqm_status mrqm_niqe_load(const char* path, mrqm_niqe_model** out);
MRQM_API void mrqm_niqe_free(mrqm_niqe_model* model);

MRQM_API mrqm_status mrqm_brisque_load(const char* path, mrqm_brisque_model** out);
MRQM_API void mrqm_brisque_free(mrqm_brisque_model* model);

/* Runs a benchmark from a TOML file. output_dir overrides the configured
 * directory when not NULL; threads overrides it when non-zero. */
MRQM_API mrqm_status mrqm_bench_run(const char* config_path, const char* output_dir, unsigned threads);

#ifdef __cplusplus
}
#endif

#endif
