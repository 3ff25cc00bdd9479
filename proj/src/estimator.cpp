#include "wskde/estimator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wskde {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double gaussian_norm(std::size_t dim, double det) {
  return std::pow(two_pi, -0.5 * static_cast<double>(dim)) / det;
}

}  // namespace

Confidence::Confidence(double z_) : z(z_) {
  if (!(std::isfinite(z) && z > 0.0))
    throw std::invalid_argument("confidence z must be finite and positive");
}

Bandwidth::Bandwidth(std::vector<double> diag) : diag_(std::move(diag)) {
  if (diag_.empty())
    throw std::invalid_argument("bandwidth needs at least one dimension");
  det_ = 1.0;
  for (double h : diag_) {
    if (!(std::isfinite(h) && h > 0.0))
      throw std::invalid_argument(
          "bandwidth entries must be finite and positive");
    det_ *= h;
  }
  if (!(std::isfinite(det_) && det_ > 0.0))
    throw std::invalid_argument("bandwidth determinant must be positive");
}

double kernel_weight(std::span<const double> x, std::span<const double> xi,
                     const Bandwidth& h) {
  if (x.size() != xi.size() || x.size() != h.dim())
    throw std::invalid_argument("kernel_weight dimension mismatch");
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = (x[k] - xi[k]) / h[k];
    sq += u * u;
  }
  return gaussian_norm(h.dim(), h.det()) * std::exp(-0.5 * sq);
}

double kernel_l2sq(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return 1.0 / (std::pow(2.0, d) * std::sqrt(std::pow(std::numbers::pi, d)));
}

WeightedMoments accumulate(std::span<const double> query,
                           std::span<const SampleRecord> data,
                           const Bandwidth& h) {
  WeightedMoments m;
  for (const SampleRecord& rec : data) m.add(kernel_weight(query, rec.x, h), rec.y);
  return m;
}

std::optional<double> mean_of(const WeightedMoments& m) {
  if (m.sum_w <= 0.0) return std::nullopt;
  return m.sum_wy / m.sum_w;
}

double effective_count_of(const WeightedMoments& m, const Bandwidth& h) {
  return h.det() / kernel_l2sq(h.dim()) * m.sum_w;
}

std::optional<double> kde_mean(std::span<const double> query,
                               std::span<const SampleRecord> data,
                               const Bandwidth& h) {
  return mean_of(accumulate(query, data, h));
}

double effective_count(std::span<const double> query,
                       std::span<const SampleRecord> data, const Bandwidth& h) {
  return effective_count_of(accumulate(query, data, h), h);
}

Estimate ws_estimate(std::optional<double> m_h, double n_h, Confidence conf) {
  if (!(n_h >= 0.0))
    throw std::invalid_argument("effective count must be non-negative");
  if (n_h == 0.0) return Estimate{};  // exactly 0.5 +/- 0.5, CI [0,1]
  if (!m_h.has_value())
    throw std::invalid_argument("mean required for a positive count");
  const double m = *m_h;
  if (!(m >= 0.0 && m <= 1.0))
    throw std::invalid_argument("mean must lie in [0,1]");

  const double z = conf.z;
  const double z2 = z * z;
  const double denom = n_h + z2;
  Estimate e;
  e.kde_mean = m;
  e.n_eff = n_h;
  e.center = (n_h * m + 0.5 * z2) / denom;
  e.half_width = z / denom * std::sqrt(n_h * m * (1.0 - m) + 0.25 * z2);
  e.lcb = std::max(0.0, e.center - e.half_width);
  e.ucb = std::min(1.0, e.center + e.half_width);
  return e;
}

Estimate wilson_raw(std::uint64_t successes, std::uint64_t trials,
                    Confidence conf) {
  if (trials == 0) throw std::invalid_argument("wilson_raw needs trials >= 1");
  if (successes > trials)
    throw std::invalid_argument("successes exceed trials");
  const double n = static_cast<double>(trials);
  return ws_estimate(static_cast<double>(successes) / n, n, conf);
}

Estimate ws_from_moments(const WeightedMoments& m, const Bandwidth& h,
                         Confidence conf) {
  return ws_estimate(mean_of(m), effective_count_of(m, h), conf);
}

std::optional<Estimate> na_from_moments(const WeightedMoments& m,
                                        const Bandwidth& h, Confidence conf) {
  const std::optional<double> mean = mean_of(m);
  if (!mean) return std::nullopt;
  const double n_h = effective_count_of(m, h);
  if (n_h <= 0.0) return std::nullopt;
  // Weighted second moment; clamp the tiny negative values that cancellation
  // can produce for near-constant outcomes.
  const double s2 = std::max(0.0, m.sum_wy2 / m.sum_w - *mean * *mean);
  Estimate e;
  e.kde_mean = mean;
  e.n_eff = n_h;
  e.center = *mean;
  e.half_width = conf.z * std::sqrt(s2 / n_h);
  e.lcb = std::max(0.0, e.center - e.half_width);
  e.ucb = std::min(1.0, e.center + e.half_width);
  return e;
}

std::optional<Estimate> na_estimate(std::span<const double> query,
                                    std::span<const SampleRecord> data,
                                    const Bandwidth& h, Confidence conf) {
  return na_from_moments(accumulate(query, data, h), h, conf);
}

}  // namespace wskde
