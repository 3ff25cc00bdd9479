#include "wskde/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wskde {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<std::size_t> axis_counts(const Box& domain,
                                     std::span<const double> spacing) {
  if (domain.lo.size() != domain.hi.size() || domain.lo.empty())
    throw std::invalid_argument("domain bounds are inconsistent");
  if (spacing.size() != domain.lo.size())
    throw std::invalid_argument("spacing dimension mismatch");
  std::vector<std::size_t> counts(domain.lo.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double lo = domain.lo[k];
    const double hi = domain.hi[k];
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
      throw std::invalid_argument("domain bounds must be finite with hi > lo");
    if (!(std::isfinite(spacing[k]) && spacing[k] > 0.0))
      throw std::invalid_argument("grid spacing must be positive");
    // The slack absorbs division round-off when the spacing divides the
    // extent exactly (e.g. extent/1000 recovering 1001 points).
    const double steps = std::floor((hi - lo) / spacing[k] + 1e-9);
    counts[k] = steps < 0.0 ? 1 : static_cast<std::size_t>(steps) + 1;
  }
  return counts;
}

}  // namespace

Grid::Grid(Box domain, std::vector<double> spacing, Bandwidth h,
           Confidence conf, EstimatorKind kind)
    : dim_(domain.lo.size()),
      domain_(std::move(domain)),
      h_(std::move(h)),
      conf_(conf),
      kind_(kind) {
  if (h_.dim() != dim_)
    throw std::invalid_argument("bandwidth dimension mismatch");
  if (spacing.empty()) spacing.assign(h_.diag().begin(), h_.diag().end());
  shape_ = axis_counts(domain_, spacing);

  count_ = 1;
  for (std::size_t n : shape_) count_ *= n;
  points_.resize(count_ * dim_);

  // Cartesian product, last dimension fastest; endpoints pinned exactly.
  std::vector<std::size_t> idx(dim_, 0);
  for (std::size_t i = 0; i < count_; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      const std::size_t n = shape_[k];
      double x;
      if (n == 1)
        x = domain_.lo[k];
      else if (idx[k] == n - 1)
        x = domain_.hi[k];
      else
        x = domain_.lo[k] + static_cast<double>(idx[k]) *
                                (domain_.hi[k] - domain_.lo[k]) /
                                static_cast<double>(n - 1);
      points_[i * dim_ + k] = x;
    }
    for (std::size_t k = dim_; k-- > 0;) {
      if (++idx[k] < shape_[k]) break;
      idx[k] = 0;
    }
  }

  moments_.resize(count_);
  estimates_.resize(count_);
  pruned_.assign(count_, 0);
  norm_ = std::pow(two_pi, -0.5 * static_cast<double>(dim_)) / h_.det();
  refresh();
}

void Grid::set_estimator(EstimatorKind kind) {
  kind_ = kind;
  refresh();
}

void Grid::set_truncation_radius(std::optional<double> radius) {
  if (radius && !(*radius > 0.0))
    throw std::invalid_argument("truncation radius must be positive");
  trunc_r2_ = radius ? std::optional<double>(*radius * *radius) : std::nullopt;
}

void Grid::ingest(std::span<const double> x, double y) {
  if (x.size() != dim_) throw std::invalid_argument("sample dimension mismatch");
  if (!(y >= 0.0 && y <= 1.0))
    throw std::invalid_argument("sample outcome must lie in [0,1]");
  for (std::size_t k = 0; k < dim_; ++k) {
    if (!(x[k] >= domain_.lo[k] && x[k] <= domain_.hi[k]))
      throw std::invalid_argument("sample location outside the domain");
  }

  const double* hd = h_.diag().data();
  for (std::size_t i = 0; i < count_; ++i) {
    const double* g = points_.data() + i * dim_;
    double sq = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double u = (g[k] - x[k]) / hd[k];
      sq += u * u;
    }
    if (trunc_r2_ && sq > *trunc_r2_) continue;
    moments_[i].add(norm_ * std::exp(-0.5 * sq), y);
  }
  ++samples_;
}

void Grid::refresh() {
  for (std::size_t i = 0; i < count_; ++i)
    estimates_[i] = estimate_as(i, kind_);
}

std::optional<Estimate> Grid::estimate_as(std::size_t i,
                                          EstimatorKind kind) const {
  if (kind == EstimatorKind::wskde)
    return ws_from_moments(moments_[i], h_, conf_);
  return na_from_moments(moments_[i], h_, conf_);
}

void Grid::prune() {
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < count_; ++i) {
    const double lcb = estimates_[i] ? estimates_[i]->lcb : 0.0;
    if (lcb > best) {
      best = lcb;
      best_i = i;
    }
  }
  lcb_max_ = best;
  argmax_lcb_ = best_i;
  for (std::size_t i = 0; i < count_; ++i) {
    const double ucb = estimates_[i] ? estimates_[i]->ucb : 1.0;
    pruned_[i] = ucb < lcb_max_ ? 1 : 0;
  }
}

std::size_t Grid::unpruned_count() const {
  std::size_t n = 0;
  for (char p : pruned_)
    if (!p) ++n;
  return n;
}

std::size_t Grid::select_next(RngStream& rng) const {
  const std::size_t n = unpruned_count();
  if (n == 0) throw std::logic_error("no unpruned grid points");
  std::size_t k = rng.uniform_below(n);
  for (std::size_t i = 0; i < count_; ++i) {
    if (pruned_[i]) continue;
    if (k == 0) return i;
    --k;
  }
  throw std::logic_error("unpruned point walk out of range");
}

Optimizer::Optimizer(OptimizerConfig cfg, const TestFunction& truth,
                     const NoiseModel& noise)
    : cfg_(std::move(cfg)),
      truth_(&truth),
      noise_(&noise),
      grid_(cfg_.domain, cfg_.spacing, cfg_.bandwidth, cfg_.conf,
            cfg_.estimator),
      start_(std::chrono::steady_clock::now()) {
  if (grid_.dim() != 1)
    throw std::invalid_argument("optimization objective is one-dimensional");
  if (cfg_.budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (cfg_.stop_half_width &&
      !(*cfg_.stop_half_width > 0.0 && *cfg_.stop_half_width <= 0.5))
    throw std::invalid_argument("stop threshold must lie in (0, 0.5]");
  if (cfg_.truncation_radius)
    grid_.set_truncation_radius(cfg_.truncation_radius);

  truth_at_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i)
    truth_at_[i] = (*truth_)(grid_.point(i)[0]);
  trace_.reserve(cfg_.budget);
}

bool Optimizer::finished() const {
  return threshold_hit_ || iterations_ >= cfg_.budget;
}

bool Optimizer::step(RngStream& rng) {
  if (finished()) return false;

  const std::size_t chosen = grid_.select_next(rng);
  const double y = noise_->draw(truth_at_[chosen], rng);
  grid_.ingest(grid_.point(chosen), y);
  grid_.refresh();
  grid_.prune();

  std::size_t n_pruned = 0, n_false = 0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!grid_.pruned(i)) continue;
    ++n_pruned;
    if (truth_at_[i] > grid_.lcb_max()) ++n_false;
  }
  const double n = static_cast<double>(grid_.size());

  TraceRow row;
  row.x.assign(grid_.point(chosen).begin(), grid_.point(chosen).end());
  row.y = y;
  row.lcb_max = grid_.lcb_max();
  row.i_tot = static_cast<double>(n_pruned) / n;
  row.i_false = static_cast<double>(n_false) / n;
  row.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
          .count();
  trace_.push_back(std::move(row));
  ++iterations_;

  if (cfg_.stop_half_width) {
    const std::optional<Estimate>& best = grid_.estimate(grid_.argmax_lcb());
    if (best && best->half_width <= *cfg_.stop_half_width)
      threshold_hit_ = true;
  }
  return true;
}

RunResult run(const OptimizerConfig& cfg, const TestFunction& truth,
              const NoiseModel& noise) {
  RngStream rng(cfg.seed);
  return run(cfg, truth, noise, rng);
}

RunResult run(const OptimizerConfig& cfg, const TestFunction& truth,
              const NoiseModel& noise, RngStream& rng) {
  Optimizer opt(cfg, truth, noise);
  while (opt.step(rng)) {
  }
  return RunResult{opt.trace(), opt.grid(), opt.stopped_by_threshold()};
}

}  // namespace wskde
