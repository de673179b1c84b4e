#ifndef UCSTEREO_UCSTEREO_H
#define UCSTEREO_UCSTEREO_H

/* C interface of the ucstereo library. Every call returns a ucs_status; on
 * failure ucs_last_error() describes the problem (per thread). Objects are
 * opaque and owned by the caller once returned. */

#include <stddef.h>
#include <stdint.h>

#if defined(UCS_BUILDING_LIBRARY)
#define UCS_API __attribute__((visibility("default")))
#else
#define UCS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ucs_status {
  UCS_OK = 0,
  UCS_ERR_INVALID_ARGUMENT = 1,
  UCS_ERR_IO = 2,
  UCS_ERR_FORMAT = 3,
  UCS_ERR_NO_SUPERVISION = 4,
  UCS_ERR_INTERNAL = 5
} ucs_status;

typedef struct ucs_raster ucs_raster;
typedef struct ucs_config ucs_config;
typedef struct ucs_roc ucs_roc;
typedef struct ucs_adapt_report ucs_adapt_report;

UCS_API const char* ucs_version(void);
/* Message of the last failed call on this thread; "" if none. */
UCS_API const char* ucs_last_error(void);
UCS_API const char* ucs_status_name(ucs_status status);

/* ---- rasters: row-major float grids (images, disparities, fields) ---- */

/* data may be NULL for a zero-filled raster. */
UCS_API ucs_status ucs_raster_create(int width, int height, const float* data,
                                     ucs_raster** out);
UCS_API void ucs_raster_destroy(ucs_raster* raster);
UCS_API int ucs_raster_width(const ucs_raster* raster);
UCS_API int ucs_raster_height(const ucs_raster* raster);
UCS_API const float* ucs_raster_data(const ucs_raster* raster);
UCS_API float* ucs_raster_data_mut(ucs_raster* raster);

/* 8/16-bit PNG or binary PGM, scaled to [0,1]. */
UCS_API ucs_status ucs_read_image(const char* path, ucs_raster** out);
/* 16-bit greyscale PNG; values must lie in [0,1]. */
UCS_API ucs_status ucs_write_image(const ucs_raster* image, const char* path);
/* .pfm or KITTI .png by extension; NaN marks invalid pixels. */
UCS_API ucs_status ucs_read_disparity(const char* path, ucs_raster** out);
UCS_API ucs_status ucs_write_disparity(const ucs_raster* disparity, const char* path);
UCS_API uint16_t ucs_kitti_encode(float disparity);
UCS_API float ucs_kitti_decode(uint16_t stored);

/* ---- pipeline configuration ---- */

UCS_API ucs_status ucs_config_create(ucs_config** out);
UCS_API void ucs_config_destroy(ucs_config* config);
UCS_API ucs_status ucs_config_load(const char* path, ucs_config** out);
UCS_API ucs_status ucs_config_save(const ucs_config* config, const char* path);
/* `key = value` text, as written by ucs_config_save. */
UCS_API ucs_status ucs_config_parse(const char* text, ucs_config** out);
UCS_API ucs_status ucs_config_set(ucs_config* config, const char* key, double value);
UCS_API ucs_status ucs_config_get(const ucs_config* config, const char* key, double* value);
UCS_API size_t ucs_config_key_count(void);
UCS_API const char* ucs_config_key(size_t index);

/* ---- synthetic stereograms ---- */

typedef enum ucs_disparity_model {
  UCS_MODEL_CONSTANT = 0,
  UCS_MODEL_SLANTED = 1,
  UCS_MODEL_TWO_LAYER = 2
} ucs_disparity_model;

typedef struct ucs_synth_spec {
  int width;
  int height;
  ucs_disparity_model model;
  int disparity;            /* constant */
  double plane[3];          /* slanted: round(a x + b y + c) */
  int fg_disparity;         /* two-layer */
  int bg_disparity;
  int box[4];               /* x0, y0, x1, y1 of the foreground */
  double dot_density;
  double noise_sigma;
  double brightness_offset; /* added to the right view */
  uint64_t seed;
  int d_max;
} ucs_synth_spec;

UCS_API void ucs_synth_spec_default(ucs_synth_spec* spec);
/* occluded is 1 where the left pixel has no match, else 0. Any output
 * pointer may be NULL. */
UCS_API ucs_status ucs_synthesize(const ucs_synth_spec* spec, ucs_raster** left,
                                  ucs_raster** right, ucs_raster** gt,
                                  ucs_raster** occluded);

/* ---- matching ---- */

/* Full-resolution disparity and its standard deviation sqrt(U). */
UCS_API ucs_status ucs_match(const ucs_config* config, const ucs_raster* left,
                             const ucs_raster* right, int threads, ucs_raster** disparity,
                             ucs_raster** stddev);
/* Disparity of the right view, for left-right checks. */
UCS_API ucs_status ucs_match_right_view(const ucs_config* config, const ucs_raster* left,
                                        const ucs_raster* right, int threads,
                                        ucs_raster** disparity);

typedef struct ucs_label_stats {
  double pixel_density;  /* sqrt(U) < t_pixel */
  double area_density;   /* U_area < t_area */
  double density;        /* both */
  size_t valid_count;
} ucs_label_stats;

/* Pseudo-labels with the config's t_pixel and t_area. Unlabelled pixels are
 * NaN. An empty label is a success. */
UCS_API ucs_status ucs_pseudolabel(const ucs_config* config, const ucs_raster* left,
                                   const ucs_raster* right, int threads, ucs_raster** label,
                                   ucs_label_stats* stats);

/* ---- evaluation ---- */

typedef struct ucs_metrics {
  double epe;
  double d1_all;
  double bad1;
  double bad2;
  size_t valid_count;
} ucs_metrics;

UCS_API ucs_status ucs_evaluate(const ucs_raster* disparity, const ucs_raster* gt,
                                ucs_metrics* out);
UCS_API ucs_status ucs_metrics_write_csv(const ucs_metrics* metrics, const char* path);

UCS_API ucs_status ucs_roc_compute(const ucs_raster* disparity, const ucs_raster* gt,
                                   const ucs_raster* uncertainty, double step, ucs_roc** out);
UCS_API void ucs_roc_destroy(ucs_roc* roc);
UCS_API size_t ucs_roc_size(const ucs_roc* roc);
UCS_API ucs_status ucs_roc_point(const ucs_roc* roc, size_t index, double* removed_fraction,
                                 double* density, double* d1);
UCS_API double ucs_roc_auc(const ucs_roc* roc);
UCS_API ucs_status ucs_roc_write_csv(const ucs_roc* roc, const char* path);

UCS_API double ucs_smooth_l1(double x);
/* Losses over pixels where label is not NaN. */
UCS_API ucs_status ucs_silog_loss(const ucs_raster* prediction, const ucs_raster* label,
                                  double lambda, double* out);
/* mask: 0/1, NaN marks undefined pixels. */
UCS_API ucs_status ucs_bce_loss(const ucs_raster* u_area, const ucs_raster* mask, double* out);

/* depth = focal * baseline / d; non-positive or NaN entries give NaN. The
 * same call converts depth back to disparity. */
UCS_API ucs_status ucs_triangulate(const ucs_raster* input, double focal_length,
                                   double baseline, ucs_raster** out);

/* ---- self-adaptation ---- */

/* Tunes a copy of `init` on unlabelled pairs. Fails with
 * UCS_ERR_NO_SUPERVISION when no pair yields a label. */
UCS_API ucs_status ucs_adapt(const ucs_config* init, const ucs_raster* const* lefts,
                             const ucs_raster* const* rights, size_t pair_count,
                             int iterations, int threads, ucs_config** adapted,
                             ucs_adapt_report** report);
UCS_API void ucs_adapt_report_destroy(ucs_adapt_report* report);
UCS_API size_t ucs_adapt_report_iterations(const ucs_adapt_report* report);
UCS_API ucs_status ucs_adapt_report_objective(const ucs_adapt_report* report, size_t iteration,
                                              double* initial, double* final_value);
UCS_API size_t ucs_adapt_report_warning_count(const ucs_adapt_report* report);
UCS_API const char* ucs_adapt_report_warning(const ucs_adapt_report* report, size_t index);
UCS_API ucs_status ucs_adapt_report_write_csv(const ucs_adapt_report* report, const char* path);

#ifdef __cplusplus
}
#endif

#endif
