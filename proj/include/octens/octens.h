/*
 * C interface to the octens library: OCT slice preprocessing and augmentation,
 * score/label/manifest files, eye-wise splits, macro-F1 evaluation, weighted
 * branch ensembling with lattice weight search, and the toy attention and
 * convolution block self-checks.
 *
 * Objects are opaque handles created by octens_*_create/_read functions and
 * released with the matching octens_*_free. Every fallible call returns an
 * octens_status; on failure octens_last_error() describes the problem (the
 * message is per thread and valid until the next failing call on it).
 * Output handles are only written on success.
 */
#ifndef OCTENS_H
#define OCTENS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(OCTENS_BUILDING)
#    define OCTENS_API __declspec(dllexport)
#  else
#    define OCTENS_API __declspec(dllimport)
#  endif
#else
#  define OCTENS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum octens_status {
    OCTENS_OK = 0,
    OCTENS_ERR_PARAMETER = 1, /* argument out of range or inconsistent */
    OCTENS_ERR_FORMAT = 2,    /* file content violates its format */
    OCTENS_ERR_IO = 3,        /* file missing or not writable */
    OCTENS_ERR_MISMATCH = 4,  /* golden output differs */
    OCTENS_ERR_INTERNAL = 5
} octens_status;

OCTENS_API const char* octens_last_error(void);
OCTENS_API const char* octens_version(void);

/* Biomarker columns, in file order: IRHRF, PAVF, FAVF, IRF, DRT_ME, VD. */
#define OCTENS_NUM_LABELS 6
OCTENS_API const char* octens_label_name(size_t column);

/* ---- images ------------------------------------------------------------ */

typedef struct octens_image octens_image;
typedef struct octens_rng octens_rng;

OCTENS_API octens_status octens_image_create(int width, int height, const uint8_t* pixels, octens_image** out);
OCTENS_API octens_status octens_image_read_png(const char* path, octens_image** out);
OCTENS_API octens_status octens_image_write_png(const octens_image* img, const char* path);
OCTENS_API int octens_image_width(const octens_image* img);
OCTENS_API int octens_image_height(const octens_image* img);
/* Row-major, width * height bytes, owned by the image. */
OCTENS_API const uint8_t* octens_image_pixels(const octens_image* img);
OCTENS_API void octens_image_free(octens_image* img);

OCTENS_API octens_status octens_rng_create(uint64_t seed, octens_rng** out);
OCTENS_API void octens_rng_free(octens_rng* rng);

typedef struct octens_augment_spec {
    double crop_fraction;
    double hflip_probability;
    double blur_sigma_lo, blur_sigma_hi;
    double perspective_distortion;
    double affine_max_rotation; /* degrees */
    double affine_max_translate_fraction;
    double affine_scale_lo, affine_scale_hi;
    int background_threshold;
    uint64_t seed;
} octens_augment_spec;

OCTENS_API void octens_augment_spec_default(octens_augment_spec* spec);
/* Flat `key = value` file; keys are the field names above with ranges
 * written as `blur_sigma_range = lo, hi` and `affine_scale_range = lo, hi`. */
OCTENS_API octens_status octens_augment_spec_read(const char* path, octens_augment_spec* out);

OCTENS_API octens_status octens_linear_transform(const octens_image* img, double alpha, double beta, octens_image** out);
OCTENS_API octens_status octens_blacken_background(const octens_image* img, int threshold, octens_image** out);
/* linear transform, then background blackening */
OCTENS_API octens_status octens_preprocess(const octens_image* img, double alpha, double beta, int threshold,
                                           octens_image** out);
OCTENS_API octens_status octens_random_crop(const octens_image* img, double crop_fraction, octens_rng* rng,
                                            octens_image** out);
OCTENS_API octens_status octens_horizontal_flip(const octens_image* img, octens_image** out);
OCTENS_API octens_status octens_gaussian_blur(const octens_image* img, double sigma, octens_image** out);
OCTENS_API octens_status octens_random_perspective(const octens_image* img, double distortion, octens_rng* rng,
                                                   octens_image** out);
OCTENS_API octens_status octens_random_affine(const octens_image* img, const octens_augment_spec* spec,
                                              octens_rng* rng, octens_image** out);
/* background, crop, flip, blur, perspective, affine */
OCTENS_API octens_status octens_augment(const octens_image* img, const octens_augment_spec* spec, octens_rng* rng,
                                        octens_image** out);

/* ---- score, label and manifest files ------------------------------------ */

typedef struct octens_scores octens_scores;
typedef struct octens_labels octens_labels;
typedef struct octens_manifest octens_manifest;
typedef struct octens_split octens_split;

/* values: rows x 6, row-major */
OCTENS_API octens_status octens_scores_create(size_t rows, const char* const* sample_ids, const double* values,
                                              octens_scores** out);
OCTENS_API octens_status octens_scores_read(const char* path, octens_scores** out);
OCTENS_API octens_status octens_scores_write(const octens_scores* scores, const char* path);
OCTENS_API size_t octens_scores_rows(const octens_scores* scores);
OCTENS_API const char* octens_scores_sample_id(const octens_scores* scores, size_t row);
OCTENS_API double octens_scores_value(const octens_scores* scores, size_t row, size_t column);
OCTENS_API void octens_scores_free(octens_scores* scores);

OCTENS_API octens_status octens_labels_create(size_t rows, const char* const* sample_ids, const uint8_t* values,
                                              octens_labels** out);
OCTENS_API octens_status octens_labels_read(const char* path, octens_labels** out);
OCTENS_API octens_status octens_labels_write(const octens_labels* labels, const char* path);
OCTENS_API size_t octens_labels_rows(const octens_labels* labels);
OCTENS_API const char* octens_labels_sample_id(const octens_labels* labels, size_t row);
OCTENS_API int octens_labels_value(const octens_labels* labels, size_t row, size_t column);
OCTENS_API void octens_labels_free(octens_labels* labels);

/* Both outputs hold the common ids in lexicographic order. n_dropped (may be
 * NULL) receives the number of ids present on one side only. */
OCTENS_API octens_status octens_align(const octens_scores* a, const octens_labels* b, octens_scores** out_a,
                                      octens_labels** out_b, size_t* n_dropped);

OCTENS_API octens_status octens_manifest_read(const char* path, octens_manifest** out);
OCTENS_API size_t octens_manifest_size(const octens_manifest* manifest);
OCTENS_API void octens_manifest_free(octens_manifest* manifest);

OCTENS_API octens_status octens_eyewise_split(const octens_manifest* manifest, double val_fraction, uint64_t seed,
                                              octens_split** out);
OCTENS_API void octens_split_counts(const octens_split* split, size_t* train, size_t* val);
/* `sample_id,split` rows in manifest order */
OCTENS_API octens_status octens_split_write(const octens_manifest* manifest, const octens_split* split,
                                            const char* path);
OCTENS_API void octens_split_free(octens_split* split);

/* ---- metrics ----------------------------------------------------------- */

typedef struct octens_metric_report {
    double per_label_f1[OCTENS_NUM_LABELS];
    double macro_f1;
    size_t tp[OCTENS_NUM_LABELS], fp[OCTENS_NUM_LABELS], fn[OCTENS_NUM_LABELS], tn[OCTENS_NUM_LABELS];
} octens_metric_report;

/* value >= threshold -> 1 */
OCTENS_API octens_status octens_binarize(const octens_scores* scores, double threshold, octens_labels** out);
/* pred and truth must list the same ids in the same order. */
OCTENS_API octens_status octens_evaluate(const octens_labels* pred, const octens_labels* truth,
                                         octens_metric_report* out);

/* ---- ensemble ---------------------------------------------------------- */

typedef struct octens_branchset octens_branchset;
typedef struct octens_validation_set octens_validation_set;
typedef struct octens_weights octens_weights;

/* Branches are restricted to the ids they all share, sorted. */
OCTENS_API octens_status octens_branchset_create(size_t n_branches, const char* const* branch_ids,
                                                 const octens_scores* const* scores, octens_branchset** out,
                                                 size_t* n_dropped);
OCTENS_API size_t octens_branchset_size(const octens_branchset* set);
OCTENS_API size_t octens_branchset_samples(const octens_branchset* set);
OCTENS_API const char* octens_branchset_id(const octens_branchset* set, size_t branch);
OCTENS_API void octens_branchset_free(octens_branchset* set);

/* Weights are normalized before use; they must be >= 0 with positive sum. */
OCTENS_API octens_status octens_combine(const octens_branchset* set, const double* weights, size_t n_weights,
                                        octens_scores** out);
OCTENS_API octens_status octens_predict(const octens_branchset* set, const double* weights, size_t n_weights,
                                        double threshold, octens_labels** out);

/* Branch scores and truth restricted to the ids all of them share. */
OCTENS_API octens_status octens_validation_set_create(size_t n_branches, const char* const* branch_ids,
                                                      const octens_scores* const* scores, const octens_labels* truth,
                                                      octens_validation_set** out, size_t* n_dropped);
OCTENS_API size_t octens_validation_set_samples(const octens_validation_set* set);
OCTENS_API void octens_validation_set_free(octens_validation_set* set);

typedef enum octens_search_method { OCTENS_SEARCH_GRID = 0, OCTENS_SEARCH_COORDINATE = 1 } octens_search_method;

typedef struct octens_search_config {
    double step; /* 1/step must be an integer */
    octens_search_method method;
    int max_rounds; /* coordinate ascent only */
    double threshold;
} octens_search_config;

typedef struct octens_search_result {
    double objective; /* mean macro F1 over the validation sets */
    size_t evaluations;
    int degenerate; /* nonzero if a validation set had fewer than 2 samples */
} octens_search_result;

OCTENS_API void octens_search_config_default(octens_search_config* cfg);
/* weights_out receives one weight per branch (n_weights must match). */
OCTENS_API octens_status octens_optimize(const octens_validation_set* const* sets, size_t n_sets,
                                         const octens_search_config* cfg, double* weights_out, size_t n_weights,
                                         octens_search_result* result);
OCTENS_API octens_status octens_objective(const octens_validation_set* const* sets, size_t n_sets,
                                          const double* weights, size_t n_weights, double threshold, double* out);

/* `branch_id,weight` CSV */
OCTENS_API octens_status octens_weights_read(const char* path, octens_weights** out);
OCTENS_API size_t octens_weights_size(const octens_weights* w);
OCTENS_API const char* octens_weights_id(const octens_weights* w, size_t k);
OCTENS_API double octens_weights_value(const octens_weights* w, size_t k);
/* nonzero when the decimal values in the file add up to exactly 1 */
OCTENS_API int octens_weights_sum_to_one(const octens_weights* w);
/* Weights in the branch order of `set`; ids must match one to one. */
OCTENS_API octens_status octens_weights_for(const octens_weights* w, const octens_branchset* set, double* out,
                                            size_t n_out);
OCTENS_API octens_status octens_weights_write(size_t n, const char* const* branch_ids, const double* weights,
                                              const char* path);
OCTENS_API void octens_weights_free(octens_weights* w);

/* ---- blocks and fixture self-checks -------------------------------------- */

typedef void (*octens_check_callback)(const char* name, int passed, const char* detail, void* user);

typedef enum octens_attention_variant { OCTENS_ATTENTION_DENSE = 0, OCTENS_ATTENTION_MAX_SA = 1 } octens_attention_variant;

OCTENS_API octens_status octens_attention_op_count(int height, int width, int channels, int heads,
                                                   octens_attention_variant variant, int window, int grid,
                                                   uint64_t* out);

/* weights_path may be NULL (seeded weights). all_passed may be NULL. */
OCTENS_API octens_status octens_blocks_selfcheck(uint64_t seed, int size, const char* weights_path,
                                                 octens_check_callback cb, void* user, int* all_passed);

/* Runs the shipped five-branch weight fixture in `dir`. */
OCTENS_API octens_status octens_fixture_run(const char* dir, octens_check_callback cb, void* user, int* passed,
                                            int* normalized);

#ifdef __cplusplus
}
#endif

#endif /* OCTENS_H */
