/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "mrqm/mrqm.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                \
        }                                                              \
    } while (0)

int main(void) {
    mrqm_image* phantom = NULL;
    EXPECT(mrqm_phantom(5, 64, 64, &phantom) == MRQM_OK);
    size_t w = 0, h = 0;
    EXPECT(mrqm_image_size(phantom, &w, &h) == MRQM_OK && w == 64 && h == 64);

    double score = 0.0;
    EXPECT(mrqm_metric("ssim", phantom, phantom, NULL, NULL, NULL, &score) == MRQM_OK);
    EXPECT(fabs(score - 1.0) < 1e-12);
    EXPECT(mrqm_metric("psnr", phantom, phantom, "pair", NULL, NULL, &score) == MRQM_OK);
    EXPECT(isinf(score));
    EXPECT(mrqm_metric("mtv", phantom, NULL, NULL, NULL, NULL, &score) == MRQM_OK && score > 0.0);
    EXPECT(mrqm_metric("ssim", phantom, NULL, NULL, NULL, NULL, &score) == MRQM_ERR_INVALID_ARGUMENT);
    EXPECT(strlen(mrqm_last_error()) > 0);
    EXPECT(mrqm_metric("nosuch", phantom, phantom, NULL, NULL, NULL, &score) == MRQM_ERR_INVALID_ARGUMENT);
    EXPECT(mrqm_metric("ssim", phantom, phantom, "fixed:-1", NULL, NULL, &score) != MRQM_OK);

    const double flat[4] = {1.0, 1.0, 1.0, 1.0};
    mrqm_image* constant = NULL;
    EXPECT(mrqm_image_create(2, 2, flat, &constant) == MRQM_OK);
    EXPECT(mrqm_metric("pcc", constant, constant, NULL, NULL, NULL, &score) == MRQM_ERR_DEGENERATE);
    EXPECT(mrqm_image_create(2, 2, NULL, &constant) == MRQM_ERR_INVALID_ARGUMENT || constant != NULL);

    mrqm_image* missing = NULL;
    EXPECT(mrqm_image_load("/nonexistent/file.npy", &missing) == MRQM_ERR_DATA);
    EXPECT(missing == NULL);

    mrqm_image* blurred = NULL;
    EXPECT(mrqm_distort(phantom, "GaussianBlur", 3.0, 0, &blurred) == MRQM_OK);
    EXPECT(mrqm_distort(phantom, "Sharpen", 3.0, 0, &missing) == MRQM_ERR_INVALID_ARGUMENT);
    double be_sharp = 0.0, be_blur = 0.0;
    EXPECT(mrqm_metric("be", phantom, NULL, NULL, NULL, NULL, &be_sharp) == MRQM_OK);
    EXPECT(mrqm_metric("be", blurred, NULL, NULL, NULL, NULL, &be_blur) == MRQM_OK);
    EXPECT(be_blur > be_sharp);

    mrqm_image* norm = NULL;
    EXPECT(mrqm_normalize(phantom, "minmax", &norm) == MRQM_OK);
    const double* data = NULL;
    EXPECT(mrqm_image_data(norm, &data) == MRQM_OK);
    double lo = data[0], hi = data[0];
    for (size_t i = 0; i < w * h; ++i) {
        lo = data[i] < lo ? data[i] : lo;
        hi = data[i] > hi ? data[i] : hi;
    }
    EXPECT(lo == 0.0 && hi == 1.0);

    size_t count = mrqm_metric_count(), index = 0;
    EXPECT(count > 20);
    EXPECT(mrqm_metric_find("cpbd", &index) == MRQM_OK);
    const char* name = NULL;
    int needs_ref = -1, higher = -1;
    EXPECT(mrqm_metric_info(index, &name, &needs_ref, &higher) == MRQM_OK);
    EXPECT(strcmp(name, "cpbd") == 0 && needs_ref == 0 && higher == 1);
    EXPECT(mrqm_metric_info(count, &name, NULL, NULL) == MRQM_ERR_INVALID_ARGUMENT);
    EXPECT(mrqm_distortion_count() == 11);
    EXPECT(strcmp(mrqm_distortion_name(0), "BiasField") == 0);
    EXPECT(mrqm_distortion_name(11) == NULL);

    char buf[8];
    size_t needed = 0;
    EXPECT(mrqm_format_double(1.0, buf, sizeof buf, &needed) == MRQM_OK && strcmp(buf, "1.0") == 0);
    EXPECT(mrqm_format_double(0.1234567, buf, sizeof buf, &needed) == MRQM_OK && needed == 9 && strlen(buf) == 7);

    mrqm_image_free(norm);
    mrqm_image_free(blurred);
    mrqm_image_free(constant);
    mrqm_image_free(phantom);
    mrqm_image_free(NULL);
    mrqm_niqe_free(NULL);

    if (failures == 0) printf("all C API checks passed\n");
    return failures == 0 ? 0 : 1;
}
