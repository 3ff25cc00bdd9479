#include "wskde/capi.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "wskde/estimator.hpp"
#include "wskde/metrics.hpp"
#include "wskde/objectives.hpp"
#include "wskde/optimizer.hpp"

namespace {

thread_local std::string g_last_error;

constexpr const char* kVersion = "0.1.0";

wskde_status fail(wskde_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
wskde_status guarded(Fn&& fn) {
  try {
    fn();
    return WSKDE_OK;
  } catch (const std::invalid_argument& e) {
    return fail(WSKDE_ERR_USAGE, e.what());
  } catch (const std::exception& e) {
    return fail(WSKDE_ERR_INTERNAL, e.what());
  }
}

template <typename T, typename Fn>
T* guarded_new(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

void to_c(const wskde::Estimate& e, wskde_estimate* out) {
  out->kde_mean =
      e.kde_mean ? *e.kde_mean : std::numeric_limits<double>::quiet_NaN();
  out->n_eff = e.n_eff;
  out->center = e.center;
  out->half_width = e.half_width;
  out->lcb = e.lcb;
  out->ucb = e.ucb;
  out->defined = 1;
}

void to_c(const std::optional<wskde::Estimate>& e, wskde_estimate* out) {
  if (e) {
    to_c(*e, out);
    return;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out->kde_mean = nan;
  out->n_eff = 0.0;
  out->center = nan;
  out->half_width = nan;
  out->lcb = 0.0;
  out->ucb = 1.0;
  out->defined = 0;
}

wskde::EstimatorKind to_kind(wskde_estimator_kind k) {
  return k == WSKDE_EST_NAKDE ? wskde::EstimatorKind::nakde
                              : wskde::EstimatorKind::wskde;
}

}  // namespace

struct wskde_dataset {
  std::size_t dim;
  std::vector<wskde::SampleRecord> records;
};

struct wskde_rng {
  wskde::RngStream stream;
};

struct wskde_testfn {
  wskde::TestFunction fn;
};

struct wskde_noise {
  wskde::NoiseModel model;
};

struct wskde_grid {
  wskde::Grid grid;
};

struct wskde_bo_result {
  std::vector<wskde::TraceRow> trace;
  wskde_grid grid;
  bool stopped_by_threshold;
};

extern "C" {

const char* wskde_version(void) { return kVersion; }

const char* wskde_rng_algorithm(void) { return wskde::RngStream::algorithm; }

const char* wskde_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

wskde_status wskde_kernel_weight(size_t dim, const double* x, const double* xi,
                                 const double* h_diag, double* out) {
  if (!x || !xi || !h_diag || !out || dim == 0)
    return fail(WSKDE_ERR_USAGE, "null argument or zero dimension");
  return guarded([&] {
    wskde::Bandwidth h(std::vector<double>(h_diag, h_diag + dim));
    *out = wskde::kernel_weight({x, dim}, {xi, dim}, h);
  });
}

wskde_status wskde_ws_estimate(double kde_mean, double n_eff, double z,
                               wskde_estimate* out) {
  if (!out) return fail(WSKDE_ERR_USAGE, "null output");
  return guarded([&] {
    std::optional<double> m;
    if (!std::isnan(kde_mean)) m = kde_mean;
    to_c(wskde::ws_estimate(m, n_eff, wskde::Confidence(z)), out);
  });
}

wskde_status wskde_wilson_raw(uint64_t successes, uint64_t trials, double z,
                              wskde_estimate* out) {
  if (!out) return fail(WSKDE_ERR_USAGE, "null output");
  return guarded([&] {
    to_c(wskde::wilson_raw(successes, trials, wskde::Confidence(z)), out);
  });
}

wskde_status wskde_confidence_z(const char* level, double* z_out) {
  if (!level || !z_out) return fail(WSKDE_ERR_USAGE, "null argument");
  const std::string name(level);
  if (name == "90%")
    *z_out = 1.6449;
  else if (name == "95%")
    *z_out = 1.96;
  else if (name == "99%")
    *z_out = 2.5758;
  else
    return fail(WSKDE_ERR_USAGE, "unknown confidence level");
  return WSKDE_OK;
}

/* ------------------------------------------------------------------ */

wskde_dataset* wskde_dataset_new(size_t dim) {
  if (dim == 0) {
    g_last_error = "dataset dimension must be positive";
    return nullptr;
  }
  return guarded_new<wskde_dataset>(
      [&] { return new wskde_dataset{dim, {}}; });
}

void wskde_dataset_free(wskde_dataset* ds) { delete ds; }

wskde_status wskde_dataset_add(wskde_dataset* ds, const double* x, double y) {
  if (!ds || !x) return fail(WSKDE_ERR_USAGE, "null argument");
  if (!(y >= 0.0 && y <= 1.0))
    return fail(WSKDE_ERR_USAGE, "outcome must lie in [0,1]");
  return guarded([&] {
    ds->records.push_back(
        wskde::SampleRecord{std::vector<double>(x, x + ds->dim), y});
  });
}

size_t wskde_dataset_size(const wskde_dataset* ds) {
  return ds ? ds->records.size() : 0;
}

wskde_status wskde_dataset_estimate(const wskde_dataset* ds,
                                    const double* query, const double* h_diag,
                                    double z, wskde_estimator_kind kind,
                                    wskde_estimate* out) {
  if (!ds || !query || !h_diag || !out)
    return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] {
    wskde::Bandwidth h(std::vector<double>(h_diag, h_diag + ds->dim));
    wskde::Confidence conf(z);
    const wskde::WeightedMoments m =
        wskde::accumulate({query, ds->dim}, ds->records, h);
    if (kind == WSKDE_EST_NAKDE)
      to_c(wskde::na_from_moments(m, h, conf), out);
    else
      to_c(wskde::ws_from_moments(m, h, conf), out);
  });
}

/* ------------------------------------------------------------------ */

wskde_rng* wskde_rng_new(uint64_t seed) {
  return guarded_new<wskde_rng>(
      [&] { return new wskde_rng{wskde::RngStream(seed)}; });
}

void wskde_rng_free(wskde_rng* rng) { delete rng; }

uint64_t wskde_rng_next_u64(wskde_rng* rng) {
  return rng ? rng->stream.next_u64() : 0;
}

double wskde_rng_next_double(wskde_rng* rng) {
  return rng ? rng->stream.next_double()
             : std::numeric_limits<double>::quiet_NaN();
}

uint64_t wskde_derive_seed(uint64_t base_seed, uint64_t replication) {
  return wskde::RngStream::derive(base_seed, replication);
}

/* ------------------------------------------------------------------ */

wskde_testfn* wskde_testfn_new(double a, double b) {
  return guarded_new<wskde_testfn>(
      [&] { return new wskde_testfn{wskde::TestFunction(a, b)}; });
}

wskde_testfn* wskde_testfn_new_default(void) {
  return guarded_new<wskde_testfn>(
      [&] { return new wskde_testfn{wskde::TestFunction()}; });
}

void wskde_testfn_free(wskde_testfn* tf) { delete tf; }

wskde_status wskde_testfn_eval(const wskde_testfn* tf, double x, double* out) {
  if (!tf || !out) return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] { *out = tf->fn(x); });
}

wskde_status wskde_testfn_domain(const wskde_testfn* tf, double* lo,
                                 double* hi) {
  if (!tf || !lo || !hi) return fail(WSKDE_ERR_USAGE, "null argument");
  *lo = wskde::TestFunction::domain_lo();
  *hi = wskde::TestFunction::domain_hi();
  return WSKDE_OK;
}

size_t wskde_testfn_peak_count(const wskde_testfn* tf) {
  return tf ? tf->fn.peaks().size() : 0;
}

wskde_status wskde_testfn_peak(const wskde_testfn* tf, size_t idx,
                               double* x_out, double* value_out) {
  if (!tf || !x_out || !value_out)
    return fail(WSKDE_ERR_USAGE, "null argument");
  if (idx >= tf->fn.peaks().size())
    return fail(WSKDE_ERR_USAGE, "peak index out of range");
  *x_out = tf->fn.peaks()[idx].x;
  *value_out = tf->fn.peaks()[idx].value;
  return WSKDE_OK;
}

double wskde_testfn_max(const wskde_testfn* tf) {
  return tf ? tf->fn.max_value() : std::numeric_limits<double>::quiet_NaN();
}

/* ------------------------------------------------------------------ */

wskde_noise* wskde_noise_new_bernoulli(void) {
  return guarded_new<wskde_noise>(
      [&] { return new wskde_noise{wskde::NoiseModel::bernoulli()}; });
}

wskde_noise* wskde_noise_new_beta(double concentration) {
  return guarded_new<wskde_noise>([&] {
    return new wskde_noise{wskde::NoiseModel::beta(concentration)};
  });
}

wskde_noise* wskde_noise_new_mode_fraction(const double* probs,
                                           size_t n_categories,
                                           uint32_t parts) {
  if (!probs || n_categories == 0) {
    g_last_error = "null or empty pose probabilities";
    return nullptr;
  }
  return guarded_new<wskde_noise>([&] {
    return new wskde_noise{wskde::NoiseModel::mode_fraction(
        std::vector<double>(probs, probs + n_categories), parts)};
  });
}

void wskde_noise_free(wskde_noise* nm) { delete nm; }

wskde_status wskde_noise_draw(const wskde_noise* nm, double mean,
                              wskde_rng* rng, double* out) {
  if (!nm || !rng || !out) return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] { *out = nm->model.draw(mean, rng->stream); });
}

/* ------------------------------------------------------------------ */

wskde_grid* wskde_grid_new(size_t dim, const double* lo, const double* hi,
                           const double* spacing, const double* h_diag,
                           double z, wskde_estimator_kind kind) {
  if (dim == 0 || !lo || !hi || !spacing || !h_diag) {
    g_last_error = "null argument or zero dimension";
    return nullptr;
  }
  return guarded_new<wskde_grid>([&] {
    wskde::Box box{std::vector<double>(lo, lo + dim),
                   std::vector<double>(hi, hi + dim)};
    return new wskde_grid{wskde::Grid(
        std::move(box), std::vector<double>(spacing, spacing + dim),
        wskde::Bandwidth(std::vector<double>(h_diag, h_diag + dim)),
        wskde::Confidence(z), to_kind(kind))};
  });
}

void wskde_grid_free(wskde_grid* g) { delete g; }

size_t wskde_grid_size(const wskde_grid* g) { return g ? g->grid.size() : 0; }

size_t wskde_grid_dim(const wskde_grid* g) { return g ? g->grid.dim() : 0; }

wskde_status wskde_grid_point(const wskde_grid* g, size_t idx, double* x_out) {
  if (!g || !x_out) return fail(WSKDE_ERR_USAGE, "null argument");
  if (idx >= g->grid.size())
    return fail(WSKDE_ERR_USAGE, "grid index out of range");
  const std::span<const double> p = g->grid.point(idx);
  std::memcpy(x_out, p.data(), p.size() * sizeof(double));
  return WSKDE_OK;
}

wskde_status wskde_grid_ingest(wskde_grid* g, const double* x, double y) {
  if (!g || !x) return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] { g->grid.ingest({x, g->grid.dim()}, y); });
}

wskde_status wskde_grid_refresh(wskde_grid* g) {
  if (!g) return fail(WSKDE_ERR_USAGE, "null grid");
  return guarded([&] { g->grid.refresh(); });
}

wskde_status wskde_grid_prune(wskde_grid* g) {
  if (!g) return fail(WSKDE_ERR_USAGE, "null grid");
  return guarded([&] { g->grid.prune(); });
}

wskde_status wskde_grid_estimate(const wskde_grid* g, size_t idx,
                                 wskde_estimate* out) {
  if (!g || !out) return fail(WSKDE_ERR_USAGE, "null argument");
  if (idx >= g->grid.size())
    return fail(WSKDE_ERR_USAGE, "grid index out of range");
  to_c(g->grid.estimate(idx), out);
  return WSKDE_OK;
}

wskde_status wskde_grid_estimate_as(const wskde_grid* g, size_t idx,
                                    wskde_estimator_kind kind,
                                    wskde_estimate* out) {
  if (!g || !out) return fail(WSKDE_ERR_USAGE, "null argument");
  if (idx >= g->grid.size())
    return fail(WSKDE_ERR_USAGE, "grid index out of range");
  return guarded([&] { to_c(g->grid.estimate_as(idx, to_kind(kind)), out); });
}

int wskde_grid_pruned(const wskde_grid* g, size_t idx) {
  if (!g || idx >= g->grid.size()) return -1;
  return g->grid.pruned(idx) ? 1 : 0;
}

double wskde_grid_lcb_max(const wskde_grid* g) {
  return g ? g->grid.lcb_max() : std::numeric_limits<double>::quiet_NaN();
}

size_t wskde_grid_argmax_lcb(const wskde_grid* g) {
  return g ? g->grid.argmax_lcb() : 0;
}

uint64_t wskde_grid_sample_count(const wskde_grid* g) {
  return g ? g->grid.sample_count() : 0;
}

/* ------------------------------------------------------------------ */

wskde_status wskde_bo_run(const wskde_bo_config* cfg,
                          const wskde_testfn* truth, const wskde_noise* noise,
                          wskde_bo_result** out) {
  if (!cfg || !truth || !noise || !out)
    return fail(WSKDE_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    wskde::OptimizerConfig c;
    c.domain = wskde::Box{{cfg->lo}, {cfg->hi}};
    c.bandwidth = wskde::Bandwidth(cfg->bandwidth);
    if (cfg->spacing > 0.0) c.spacing = {cfg->spacing};
    c.conf = wskde::Confidence(cfg->z);
    c.estimator = to_kind(cfg->estimator);
    c.budget = cfg->budget;
    if (cfg->stop_half_width > 0.0) c.stop_half_width = cfg->stop_half_width;
    c.seed = cfg->seed;

    wskde::RunResult res = wskde::run(c, truth->fn, noise->model);
    *out = new wskde_bo_result{std::move(res.trace),
                               wskde_grid{std::move(res.grid)},
                               res.stopped_by_threshold};
  });
}

void wskde_bo_result_free(wskde_bo_result* res) { delete res; }

size_t wskde_bo_result_iterations(const wskde_bo_result* res) {
  return res ? res->trace.size() : 0;
}

wskde_status wskde_bo_result_trace_row(const wskde_bo_result* res, size_t idx,
                                       wskde_bo_trace_row* out) {
  if (!res || !out) return fail(WSKDE_ERR_USAGE, "null argument");
  if (idx >= res->trace.size())
    return fail(WSKDE_ERR_USAGE, "trace index out of range");
  const wskde::TraceRow& row = res->trace[idx];
  out->x = row.x[0];
  out->y = row.y;
  out->lcb_max = row.lcb_max;
  out->i_tot = row.i_tot;
  out->i_false = row.i_false;
  out->elapsed_sec = row.elapsed_sec;
  return WSKDE_OK;
}

int wskde_bo_result_stopped_by_threshold(const wskde_bo_result* res) {
  return res && res->stopped_by_threshold ? 1 : 0;
}

const wskde_grid* wskde_bo_result_grid(const wskde_bo_result* res) {
  return res ? &res->grid : nullptr;
}

/* ------------------------------------------------------------------ */

double wskde_coverage(const wskde_grid* g, const wskde_testfn* tf,
                      wskde_estimator_kind kind) {
  if (!g || !tf) return std::numeric_limits<double>::quiet_NaN();
  try {
    return wskde::coverage(g->grid, tf->fn, to_kind(kind));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double wskde_lcb_max_fraction(const wskde_grid* g, const wskde_testfn* tf) {
  if (!g || !tf) return std::numeric_limits<double>::quiet_NaN();
  return wskde::lcb_max_fraction(g->grid, tf->fn);
}

wskde_status wskde_pruning_rates(const wskde_grid* g, const wskde_testfn* tf,
                                 double* i_tot, double* i_false) {
  if (!g || !tf || !i_tot || !i_false)
    return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] {
    const wskde::PruningRates r = wskde::pruning_rates(g->grid, tf->fn);
    *i_tot = r.i_tot;
    *i_false = r.i_false;
  });
}

wskde_status wskde_attribute_peak(const wskde_grid* g, const wskde_testfn* tf,
                                  wskde_peak_label* out) {
  if (!g || !tf || !out) return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] {
    switch (wskde::attribute_peak(g->grid, tf->fn)) {
      case wskde::PeakLabel::L1:
        *out = WSKDE_PEAK_L1;
        break;
      case wskde::PeakLabel::L2:
        *out = WSKDE_PEAK_L2;
        break;
      case wskde::PeakLabel::L3:
        *out = WSKDE_PEAK_L3;
        break;
      case wskde::PeakLabel::GM:
        *out = WSKDE_PEAK_GM;
        break;
    }
  });
}

wskde_status wskde_aggregate(const double* values, size_t n, double* mean,
                             double* stddev) {
  if (!values || !mean || !stddev)
    return fail(WSKDE_ERR_USAGE, "null argument");
  return guarded([&] {
    const wskde::Aggregate a = wskde::aggregate({values, n});
    *mean = a.mean;
    *stddev = a.stddev;
  });
}

}  // extern "C"
