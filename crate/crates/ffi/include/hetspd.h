#ifndef HETSPD_H
#define HETSPD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HetspdMode {
  HETSPD_MODE_HETEROGENEOUS = 0,
  HETSPD_MODE_HOMOGENEOUS_A = 1,
  HETSPD_MODE_HOMOGENEOUS_B = 2,
} HetspdMode;

typedef enum HetspdStatus {
  HETSPD_STATUS_OK = 0,
  HETSPD_STATUS_NULL_POINTER = 1,
  HETSPD_STATUS_CONFIG_ERROR = 2,
  HETSPD_STATUS_OUT_OF_RANGE = 3,
  HETSPD_STATUS_DIMENSION_ERROR = 4,
  HETSPD_STATUS_NOT_SPD = 5,
  HETSPD_STATUS_SINGULAR_BLOCK = 6,
  HETSPD_STATUS_NUMERICAL_ERROR = 7,
  HETSPD_STATUS_NOT_CONVERGED = 8,
  HETSPD_STATUS_RESIDENCY_ERROR = 9,
  HETSPD_STATUS_BAD_MAGIC = 10,
  HETSPD_STATUS_VERSION_MISMATCH = 11,
  HETSPD_STATUS_TRUNCATED_FILE = 12,
  HETSPD_STATUS_INVALID_HEADER = 13,
  HETSPD_STATUS_TRAILING_BYTES = 14,
  HETSPD_STATUS_IO_ERROR = 15,
  HETSPD_STATUS_INVALID_UTF8 = 16,
  HETSPD_STATUS_PANIC = 17,
} HetspdStatus;

// Opaque handle to a blocked SPD matrix (or a Cholesky factor).
typedef struct HetspdMatrix HetspdMatrix;

typedef struct HetspdConfig {
  double eps;
  size_t max_iters;
  // 0 disables true-residual recomputation.
  size_t recompute_interval;
  // Share of the work placed on executor B, in `[0, 1]`.
  double fraction;
  // 0 uses the matrix's own block size; any other value reblocks first.
  size_t block_size;
  size_t workers_a;
  size_t workers_b;
  double slowdown_a;
  double slowdown_b;
  uint64_t seed;
  enum HetspdMode mode;
} HetspdConfig;

typedef struct HetspdKernelParams {
  double signal_variance;
  // Values `<= 0` select the median pairwise distance.
  double length_scale;
  double noise;
  size_t dim;
} HetspdKernelParams;

typedef struct HetspdStats {
  // CG iterations, or the number of block columns for Cholesky.
  size_t iterations;
  size_t recomputations;
  bool converged;
  double r0_norm;
  double true_residual;
  double wall_time_secs;
  double compute_time_secs;
  size_t transfers;
  uint64_t transfer_bytes;
  size_t scalar_transfers;
  size_t subvector_transfers;
  size_t block_transfers;
  size_t block_row_transfers;
} HetspdStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Defaults matching the command-line tool.
struct HetspdConfig hetspd_config_default(void);

struct HetspdKernelParams hetspd_kernel_params_default(void);

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *hetspd_last_error_message(void);

// Stable lowercase name of a status code (static storage).
const char *hetspd_status_name(enum HetspdStatus status);

// Generates a kernel matrix plus noise diagonal. `params` may be NULL.
//
// # Safety
// `params` must be NULL or valid; `out` must be writable.
enum HetspdStatus hetspd_matrix_generate(size_t n,
                                         size_t block_size,
                                         uint64_t seed,
                                         const struct HetspdKernelParams *params,
                                         struct HetspdMatrix **out);

// Builds a matrix from the lower triangle of a dense row-major `n × n` array.
//
// # Safety
// `dense` must point to `n * n` doubles; `out` must be writable.
enum HetspdStatus hetspd_matrix_from_dense(size_t n,
                                           size_t block_size,
                                           const double *dense,
                                           struct HetspdMatrix **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum HetspdStatus hetspd_matrix_load(const char *path, struct HetspdMatrix **out);

// # Safety
// `m` must be a live handle and `path` a NUL-terminated string.
enum HetspdStatus hetspd_matrix_save(const struct HetspdMatrix *m, const char *path);

// Releases a handle. NULL is ignored.
//
// # Safety
// `m` must be NULL or a handle not freed before.
void hetspd_matrix_free(struct HetspdMatrix *m);

// Logical size `n`, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t hetspd_matrix_size(const struct HetspdMatrix *m);

// Block size `b`, or 0 for NULL.
//
// # Safety
// `m` must be NULL or a live handle.
size_t hetspd_matrix_block_size(const struct HetspdMatrix *m);

// Element `(p, q)` of the symmetric matrix (lower triangle for a factor).
//
// # Safety
// `m` must be a live handle and `value` writable.
enum HetspdStatus hetspd_matrix_element(const struct HetspdMatrix *m,
                                        size_t p,
                                        size_t q,
                                        double *value);

// Solves `A·x = rhs` with CG. An iteration-capped run still writes `x` and
// `stats` and returns `NotConverged`. `stats` may be NULL.
//
// # Safety
// `rhs` and `x_out` must hold `len` doubles; other pointers valid or NULL as noted.
enum HetspdStatus hetspd_solve_cg(const struct HetspdMatrix *a,
                                  const struct HetspdConfig *config,
                                  const double *rhs,
                                  size_t len,
                                  double *x_out,
                                  struct HetspdStats *stats);

// Solves `A·x = rhs` by Cholesky factorization and two triangular solves.
// `stats` may be NULL.
//
// # Safety
// `rhs` and `x_out` must hold `len` doubles; other pointers valid or NULL as noted.
enum HetspdStatus hetspd_solve_cholesky(const struct HetspdMatrix *a,
                                        const struct HetspdConfig *config,
                                        const double *rhs,
                                        size_t len,
                                        double *x_out,
                                        struct HetspdStats *stats);

// Factors `a` into a new handle holding `L` (read it with
// [`hetspd_matrix_element`] for `p >= q`). `stats` may be NULL.
//
// # Safety
// `a` and `config` must be valid; `out` writable.
enum HetspdStatus hetspd_factorize(const struct HetspdMatrix *a,
                                   const struct HetspdConfig *config,
                                   struct HetspdMatrix **out,
                                   struct HetspdStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HETSPD_H */
