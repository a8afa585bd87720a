#ifndef DECWA_H
#define DECWA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DecwaStatus {
  DECWA_STATUS_OK = 0,
  DECWA_STATUS_NULL_POINTER = 1,
  DECWA_STATUS_CONFIG = 2,
  DECWA_STATUS_DATA = 3,
  DECWA_STATUS_PIPELINE = 4,
  DECWA_STATUS_PANIC = 5,
} DecwaStatus;

typedef enum DecwaKernel {
  DECWA_KERNEL_GAUSSIAN = 0,
  DECWA_KERNEL_UNIFORM = 1,
  DECWA_KERNEL_TRIANGULAR = 2,
} DecwaKernel;

typedef enum DecwaMetric {
  DECWA_METRIC_EUCLIDEAN = 0,
  DECWA_METRIC_MANHATTAN = 1,
  DECWA_METRIC_CANBERRA = 2,
  DECWA_METRIC_BRAY_CURTIS = 3,
  DECWA_METRIC_COSINE = 4,
} DecwaMetric;

typedef enum DecwaAgglomeration {
  DECWA_AGGLOMERATION_SINGLE_PASS = 0,
  DECWA_AGGLOMERATION_FIXPOINT = 1,
} DecwaAgglomeration;

typedef enum DecwaOutlierMode {
  DECWA_OUTLIER_MODE_ONE_CLUSTER = 0,
  DECWA_OUTLIER_MODE_SINGLETONS = 1,
} DecwaOutlierMode;

/**
 * Opaque row-major dataset.
 */
typedef struct DecwaDataset DecwaDataset;

/**
 * Opaque clustering result.
 */
typedef struct DecwaResult DecwaResult;

/**
 * Plain-data mirror of the clustering hyperparameters. Enumerated fields hold
 * `DecwaKernel`, `DecwaMetric` and `DecwaAgglomeration` values; anything else
 * is rejected with `DECWA_STATUS_CONFIG`.
 */
typedef struct DecwaParamsC {
  size_t k;
  double bandwidth;
  int32_t kernel;
  double lambda;
  double alpha;
  int32_t metric;
  size_t grid_size;
  size_t min_cluster_size;
  int32_t agglomeration;
  uint64_t seed;
} DecwaParamsC;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *decwa_last_error_message(void);

/**
 * Fills `out` with the library defaults.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `DecwaParamsC`.
 */
enum DecwaStatus decwa_params_default(struct DecwaParamsC *out);

/**
 * Copies a row-major `rows x cols` matrix into a new dataset handle.
 *
 * # Safety
 * `values` must be valid for `rows * cols` reads; `out` must be writable.
 */
enum DecwaStatus decwa_dataset_new(const double *values,
                                   size_t rows,
                                   size_t cols,
                                   struct DecwaDataset **out);

/**
 * # Safety
 * `dataset` must be null or a handle from [`decwa_dataset_new`] not yet freed.
 */
void decwa_dataset_free(struct DecwaDataset *dataset);

/**
 * # Safety
 * `dataset` must be null or a live dataset handle.
 */
size_t decwa_dataset_rows(const struct DecwaDataset *dataset);

/**
 * Clusters a dataset.
 *
 * # Safety
 * `dataset` and `params` must be live pointers; `out` must be writable.
 */
enum DecwaStatus decwa_fit(const struct DecwaDataset *dataset,
                           const struct DecwaParamsC *params,
                           struct DecwaResult **out);

/**
 * # Safety
 * `result` must be null or a handle from [`decwa_fit`] not yet freed.
 */
void decwa_result_free(struct DecwaResult *result);

/**
 * Number of labels (points) in the result; 0 for null.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
size_t decwa_result_len(const struct DecwaResult *result);

/**
 * # Safety
 * `result` must be null or a live result handle.
 */
size_t decwa_result_cluster_count(const struct DecwaResult *result);

/**
 * NaN for null.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
double decwa_result_outlier_ratio(const struct DecwaResult *result);

/**
 * Copies labels into `out`, which must hold `capacity >= decwa_result_len`.
 *
 * # Safety
 * `result` must be a live handle; `out` must be valid for `capacity` writes.
 */
enum DecwaStatus decwa_result_labels(const struct DecwaResult *result,
                                     int64_t *out,
                                     size_t capacity);

/**
 * Number of extraction thresholds used by the run.
 *
 * # Safety
 * `result` must be null or a live result handle.
 */
size_t decwa_result_threshold_count(const struct DecwaResult *result);

/**
 * Copies the thresholds (descending) into `out`.
 *
 * # Safety
 * `result` must be a live handle; `out` must be valid for `capacity` writes.
 */
enum DecwaStatus decwa_result_thresholds(const struct DecwaResult *result,
                                         double *out,
                                         size_t capacity);

/**
 * Adjusted Rand index of two label vectors of length `n`; `mode` is a
 * `DecwaOutlierMode` value.
 *
 * # Safety
 * `predicted` and `truth` must be valid for `n` reads; `out` must be writable.
 */
enum DecwaStatus decwa_adjusted_rand_index(const int64_t *predicted,
                                           const int64_t *truth,
                                           size_t n,
                                           int32_t mode,
                                           double *out);

/**
 * First Wasserstein distance between two samples (0 if either is empty).
 *
 * # Safety
 * `a` and `b` must be valid for `len_a` and `len_b` reads; `out` must be writable.
 */
enum DecwaStatus decwa_wasserstein1(const double *a,
                                    size_t len_a,
                                    const double *b,
                                    size_t len_b,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECWA_H */
