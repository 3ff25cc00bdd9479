/* C API for the wskde shared library.
 *
 * All functionality is exposed through opaque handles and plain structs so
 * the library can be consumed from C, via FFI, or by tools that should not
 * depend on the C++ ABI. Functions that can fail return a wskde_status;
 * wskde_last_error() describes the most recent failure on the calling
 * thread. Constructors return NULL on failure.
 *
 * Handles are not thread-safe individually, but independent handles may be
 * used from different threads concurrently.
 */

#ifndef WSKDE_CAPI_H
#define WSKDE_CAPI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WSKDE_API __declspec(dllexport)
#else
#define WSKDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  WSKDE_OK = 0,
  WSKDE_ERR_USAGE = 1,   /* invalid argument or handle */
  WSKDE_ERR_INTERNAL = 2 /* unexpected failure */
} wskde_status;

typedef enum {
  WSKDE_EST_WSKDE = 0, /* Wilson-score confidence bounds */
  WSKDE_EST_NAKDE = 1  /* normal-approximation baseline */
} wskde_estimator_kind;

WSKDE_API const char* wskde_version(void);
/* Name of the deterministic generator backing wskde_rng ("splitmix64"). */
WSKDE_API const char* wskde_rng_algorithm(void);
WSKDE_API const char* wskde_last_error(void);

/* ------------------------------------------------------------------ */
/* Estimates                                                          */

typedef struct {
  double kde_mean;   /* weighted sample mean; NaN when no kernel mass */
  double n_eff;      /* effective sample count */
  double center;     /* NaN when `defined` is 0 */
  double half_width; /* CI half-width; NaN when `defined` is 0 */
  double lcb;        /* 0 when undefined */
  double ucb;        /* 1 when undefined */
  int defined;       /* 0 only for the NA estimator at zero count */
} wskde_estimate;

/* Gaussian product kernel (1/det H)(2 pi)^{-d/2} exp(-|H^{-1}(x-xi)|^2/2). */
WSKDE_API wskde_status wskde_kernel_weight(size_t dim, const double* x,
                                           const double* xi,
                                           const double* h_diag, double* out);

/* Wilson-score estimate from a weighted mean and effective count. Pass a
 * NaN mean if and only if n_eff is 0 (the mean is irrelevant there and the
 * result is exactly center = 0.5, half_width = 0.5). */
WSKDE_API wskde_status wskde_ws_estimate(double kde_mean, double n_eff,
                                         double z, wskde_estimate* out);

/* Wilson interval for fixed-location Bernoulli replicates. */
WSKDE_API wskde_status wskde_wilson_raw(uint64_t successes, uint64_t trials,
                                        double z, wskde_estimate* out);

/* Maps a named two-sided confidence level ("90%", "95%", "99%") to z. */
WSKDE_API wskde_status wskde_confidence_z(const char* level, double* z_out);

/* ------------------------------------------------------------------ */
/* Dataset and batch estimation                                       */

typedef struct wskde_dataset wskde_dataset;

WSKDE_API wskde_dataset* wskde_dataset_new(size_t dim);
WSKDE_API void wskde_dataset_free(wskde_dataset* ds);
/* y must lie in [0,1]. */
WSKDE_API wskde_status wskde_dataset_add(wskde_dataset* ds, const double* x,
                                         double y);
WSKDE_API size_t wskde_dataset_size(const wskde_dataset* ds);
/* Batch estimate at one query point. */
WSKDE_API wskde_status wskde_dataset_estimate(const wskde_dataset* ds,
                                              const double* query,
                                              const double* h_diag, double z,
                                              wskde_estimator_kind kind,
                                              wskde_estimate* out);

/* ------------------------------------------------------------------ */
/* Deterministic random stream                                        */

typedef struct wskde_rng wskde_rng;

WSKDE_API wskde_rng* wskde_rng_new(uint64_t seed);
WSKDE_API void wskde_rng_free(wskde_rng* rng);
WSKDE_API uint64_t wskde_rng_next_u64(wskde_rng* rng);
WSKDE_API double wskde_rng_next_double(wskde_rng* rng); /* [0,1) */
/* Replication seed derivation; pure function of (base_seed, replication). */
WSKDE_API uint64_t wskde_derive_seed(uint64_t base_seed, uint64_t replication);

/* ------------------------------------------------------------------ */
/* Ground-truth test function                                         */

typedef struct wskde_testfn wskde_testfn;

/* S(x) = 0.5 (sin(a x^2) e^{-b (2 pi - x)} + 1) on [0, 2 pi]. */
WSKDE_API wskde_testfn* wskde_testfn_new(double a, double b);
WSKDE_API wskde_testfn* wskde_testfn_new_default(void); /* a=0.6, b=0.03 */
WSKDE_API void wskde_testfn_free(wskde_testfn* tf);
WSKDE_API wskde_status wskde_testfn_eval(const wskde_testfn* tf, double x,
                                         double* out);
WSKDE_API wskde_status wskde_testfn_domain(const wskde_testfn* tf, double* lo,
                                           double* hi);
WSKDE_API size_t wskde_testfn_peak_count(const wskde_testfn* tf);
WSKDE_API wskde_status wskde_testfn_peak(const wskde_testfn* tf, size_t idx,
                                         double* x_out, double* value_out);
/* Highest catalogued peak value. */
WSKDE_API double wskde_testfn_max(const wskde_testfn* tf);

/* ------------------------------------------------------------------ */
/* Noise models                                                       */

typedef struct wskde_noise wskde_noise;

WSKDE_API wskde_noise* wskde_noise_new_bernoulli(void);
WSKDE_API wskde_noise* wskde_noise_new_beta(double concentration);
WSKDE_API wskde_noise* wskde_noise_new_mode_fraction(const double* probs,
                                                     size_t n_categories,
                                                     uint32_t parts);
WSKDE_API void wskde_noise_free(wskde_noise* nm);
/* One outcome in [0,1]. mean must lie in [0,1]; the mode-fraction model
 * ignores it. */
WSKDE_API wskde_status wskde_noise_draw(const wskde_noise* nm, double mean,
                                        wskde_rng* rng, double* out);

/* ------------------------------------------------------------------ */
/* Evaluation grid with incremental accumulators                      */

typedef struct wskde_grid wskde_grid;

/* Per dimension: floor((hi-lo)/spacing) + 1 equally spaced points including
 * both endpoints; Cartesian product across dimensions. */
WSKDE_API wskde_grid* wskde_grid_new(size_t dim, const double* lo,
                                     const double* hi, const double* spacing,
                                     const double* h_diag, double z,
                                     wskde_estimator_kind kind);
WSKDE_API void wskde_grid_free(wskde_grid* g);
WSKDE_API size_t wskde_grid_size(const wskde_grid* g);
WSKDE_API size_t wskde_grid_dim(const wskde_grid* g);
WSKDE_API wskde_status wskde_grid_point(const wskde_grid* g, size_t idx,
                                        double* x_out);
/* Adds a sample (x in the domain, y in [0,1]) to every point's
 * accumulators. Cached estimates are refreshed separately. */
WSKDE_API wskde_status wskde_grid_ingest(wskde_grid* g, const double* x,
                                         double y);
WSKDE_API wskde_status wskde_grid_refresh(wskde_grid* g);
WSKDE_API wskde_status wskde_grid_prune(wskde_grid* g);
/* Cached estimate for the grid's bound estimator kind. */
WSKDE_API wskde_status wskde_grid_estimate(const wskde_grid* g, size_t idx,
                                           wskde_estimate* out);
/* Estimate recomputed from the accumulators for any estimator kind. */
WSKDE_API wskde_status wskde_grid_estimate_as(const wskde_grid* g, size_t idx,
                                              wskde_estimator_kind kind,
                                              wskde_estimate* out);
/* 1 if pruned, 0 if not, -1 on error. */
WSKDE_API int wskde_grid_pruned(const wskde_grid* g, size_t idx);
WSKDE_API double wskde_grid_lcb_max(const wskde_grid* g);
WSKDE_API size_t wskde_grid_argmax_lcb(const wskde_grid* g);
WSKDE_API uint64_t wskde_grid_sample_count(const wskde_grid* g);

/* ------------------------------------------------------------------ */
/* Bayesian optimization run                                          */

typedef struct {
  double lo;         /* search interval */
  double hi;
  double bandwidth;  /* kernel width h */
  double spacing;    /* grid spacing; <= 0 means "use the bandwidth" */
  double z;
  uint64_t budget;
  double stop_half_width; /* <= 0 disables the early-stop threshold */
  wskde_estimator_kind estimator;
  uint64_t seed;
} wskde_bo_config;

typedef struct {
  double x;
  double y;
  double lcb_max;
  double i_tot;
  double i_false;
  double elapsed_sec; /* wall clock since the start of the run */
} wskde_bo_trace_row;

typedef struct wskde_bo_result wskde_bo_result;

WSKDE_API wskde_status wskde_bo_run(const wskde_bo_config* cfg,
                                    const wskde_testfn* truth,
                                    const wskde_noise* noise,
                                    wskde_bo_result** out);
WSKDE_API void wskde_bo_result_free(wskde_bo_result* res);
WSKDE_API size_t wskde_bo_result_iterations(const wskde_bo_result* res);
WSKDE_API wskde_status wskde_bo_result_trace_row(const wskde_bo_result* res,
                                                 size_t idx,
                                                 wskde_bo_trace_row* out);
/* 1 if the run stopped on the half-width threshold before the budget. */
WSKDE_API int wskde_bo_result_stopped_by_threshold(const wskde_bo_result* res);
/* Borrowed view of the final grid; valid until the result is freed. */
WSKDE_API const wskde_grid* wskde_bo_result_grid(const wskde_bo_result* res);

/* ------------------------------------------------------------------ */
/* Ground-truth-aware metrics                                         */

/* Fraction of grid points whose true value lies strictly inside the
 * estimated interval. NaN on error. */
WSKDE_API double wskde_coverage(const wskde_grid* g, const wskde_testfn* tf,
                                wskde_estimator_kind kind);
/* Highest cached lower bound divided by the ground-truth maximum. */
WSKDE_API double wskde_lcb_max_fraction(const wskde_grid* g,
                                        const wskde_testfn* tf);
WSKDE_API wskde_status wskde_pruning_rates(const wskde_grid* g,
                                           const wskde_testfn* tf,
                                           double* i_tot, double* i_false);

typedef enum {
  WSKDE_PEAK_L1 = 0,
  WSKDE_PEAK_L2 = 1,
  WSKDE_PEAK_L3 = 2,
  WSKDE_PEAK_GM = 3
} wskde_peak_label;

WSKDE_API wskde_status wskde_attribute_peak(const wskde_grid* g,
                                            const wskde_testfn* tf,
                                            wskde_peak_label* out);

/* Mean and population standard deviation of `n` values. */
WSKDE_API wskde_status wskde_aggregate(const double* values, size_t n,
                                       double* mean, double* stddev);

#ifdef __cplusplus
}
#endif

#endif /* WSKDE_CAPI_H */
