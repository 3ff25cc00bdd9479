#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wskde/estimator.hpp"
#include "wskde/objectives.hpp"

namespace wskde {

/// Axis-aligned box domain.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
};

/// Grid tessellation of a box domain with per-point incremental kernel
/// accumulators, cached confidence estimates, and pruning flags.
///
/// Per dimension the grid has floor(extent/spacing) + 1 equally spaced
/// points including both endpoints (a single point at the lower bound when
/// the spacing exceeds the extent); points are the Cartesian product, last
/// dimension varying fastest. Ingesting a sample adds its kernel weight to
/// every point's accumulators, so estimates match a batch recomputation
/// over the full dataset.
class Grid {
 public:
  Grid(Box domain, std::vector<double> spacing, Bandwidth h, Confidence conf,
       EstimatorKind kind);

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim_, dim_};
  }
  const Box& domain() const { return domain_; }
  const Bandwidth& bandwidth() const { return h_; }
  Confidence confidence() const { return conf_; }
  EstimatorKind estimator() const { return kind_; }

  /// Switches the estimator backing the cached estimates and recomputes them.
  void set_estimator(EstimatorKind kind);

  /// Optional kernel cutoff: samples farther than `radius` bandwidth units
  /// from a point (in whitened distance) leave its accumulators untouched.
  /// Off by default; the incremental/batch equivalence guarantee holds only
  /// without truncation.
  void set_truncation_radius(std::optional<double> radius);

  /// Adds one sample to every point's accumulators. The sample must lie in
  /// the domain and have y in [0,1]. Does not refresh cached estimates.
  void ingest(std::span<const double> x, double y);

  /// Recomputes every cached estimate from the accumulators.
  void refresh();

  /// Recomputes the pruned marking from scratch: a point is pruned iff its
  /// upper bound is strictly below the highest lower bound across the whole
  /// grid (pruned points included in the max). Non-sticky: a point whose
  /// upper bound recovers is unmarked. The argmax point itself can never be
  /// marked. Uses the cached estimates; call refresh() first.
  void prune();

  /// Cached estimate for the bound estimator kind; empty only for the
  /// normal-approximation estimator at zero effective count.
  const std::optional<Estimate>& estimate(std::size_t i) const {
    return estimates_[i];
  }

  /// Estimate recomputed on the fly from the accumulators for any kind.
  std::optional<Estimate> estimate_as(std::size_t i, EstimatorKind kind) const;

  const WeightedMoments& moments(std::size_t i) const { return moments_[i]; }
  bool pruned(std::size_t i) const { return pruned_[i] != 0; }
  std::size_t unpruned_count() const;

  /// Highest lower bound / its index as of the last prune(); an undefined
  /// estimate counts as lower bound 0. Ties go to the lowest index.
  double lcb_max() const { return lcb_max_; }
  std::size_t argmax_lcb() const { return argmax_lcb_; }

  std::uint64_t sample_count() const { return samples_; }

  /// Uniformly random index among the unpruned points.
  std::size_t select_next(RngStream& rng) const;

 private:
  std::size_t dim_;
  std::size_t count_;
  Box domain_;
  std::vector<std::size_t> shape_;
  std::vector<double> points_;  // count_ * dim_, row-major
  std::vector<WeightedMoments> moments_;
  std::vector<std::optional<Estimate>> estimates_;
  std::vector<char> pruned_;
  Bandwidth h_;
  Confidence conf_;
  EstimatorKind kind_;
  double norm_;  // (2 pi)^{-d/2} / det H
  std::optional<double> trunc_r2_;
  double lcb_max_ = 0.0;
  std::size_t argmax_lcb_ = 0;
  std::uint64_t samples_ = 0;
};

struct OptimizerConfig {
  Box domain{{0.0}, {TestFunction::domain_hi()}};
  /// Grid spacing per dimension; empty means "use the bandwidth".
  std::vector<double> spacing;
  Bandwidth bandwidth{0.02};
  Confidence conf{1.96};
  EstimatorKind estimator = EstimatorKind::wskde;
  std::uint64_t budget = 10000;
  /// Early stop once the argmax-lower-bound point's half-width falls to or
  /// below this value; must lie in (0, 0.5].
  std::optional<double> stop_half_width;
  std::uint64_t seed = 0;
  std::optional<double> truncation_radius;
};

/// One completed optimization iteration.
struct TraceRow {
  std::vector<double> x;
  double y;
  double lcb_max;
  double i_tot;    // pruned fraction of the grid
  double i_false;  // pruned fraction with true value above lcb_max
  double elapsed_sec;  // wall clock since the start of the run
};

/// Confidence-bound-pruning optimization loop over a grid tessellation:
/// uniform selection among unpruned points, one noisy evaluation, incremental
/// accumulator update, estimate refresh, re-pruning. Stops at the iteration
/// budget or the configured half-width threshold, whichever comes first.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, const TestFunction& truth,
            const NoiseModel& noise);

  /// Runs one iteration; returns false (and does nothing) once finished.
  bool step(RngStream& rng);

  bool finished() const;
  bool stopped_by_threshold() const { return threshold_hit_; }

  const Grid& grid() const { return grid_; }
  Grid& grid() { return grid_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  const OptimizerConfig& config() const { return cfg_; }

 private:
  OptimizerConfig cfg_;
  const TestFunction* truth_;
  const NoiseModel* noise_;
  Grid grid_;
  std::vector<double> truth_at_;  // S at every grid point
  std::vector<TraceRow> trace_;
  std::uint64_t iterations_ = 0;
  bool threshold_hit_ = false;
  std::chrono::steady_clock::time_point start_;
};

struct RunResult {
  std::vector<TraceRow> trace;
  Grid grid;
  bool stopped_by_threshold;
};

/// Runs a full optimization with a stream seeded from cfg.seed.
RunResult run(const OptimizerConfig& cfg, const TestFunction& truth,
              const NoiseModel& noise);

/// Same, drawing from a caller-owned stream.
RunResult run(const OptimizerConfig& cfg, const TestFunction& truth,
              const NoiseModel& noise, RngStream& rng);

}  // namespace wskde
