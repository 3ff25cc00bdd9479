#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace wskde {

/// Two-sided normal quantile for a confidence level (1.96 for 95%).
struct Confidence {
  double z;
  explicit Confidence(double z_);
};

/// Diagonal Gaussian kernel bandwidth, one width per search-space dimension.
class Bandwidth {
 public:
  explicit Bandwidth(std::vector<double> diag);
  explicit Bandwidth(double h) : Bandwidth(std::vector<double>{h}) {}

  std::size_t dim() const { return diag_.size(); }
  double det() const { return det_; }
  std::span<const double> diag() const { return diag_; }
  double operator[](std::size_t i) const { return diag_[i]; }

 private:
  std::vector<double> diag_;
  double det_;
};

/// One evaluated experiment: location in the search space, outcome in [0,1].
struct SampleRecord {
  std::vector<double> x;
  double y;
};

/// Per-query estimate: kernel-weighted mean, effective sample count, and the
/// confidence interval [center - half_width, center + half_width].
///
/// `kde_mean` is empty when no kernel mass reaches the query (the weight sum
/// underflowed to zero). The Wilson-score estimate is defined even then; the
/// normal-approximation estimate is not, which na_estimate signals by
/// returning an empty optional.
struct Estimate {
  std::optional<double> kde_mean;  // weighted sample mean m_h
  double n_eff = 0.0;              // effective sample count n_h
  double center = 0.5;
  double half_width = 0.5;
  double lcb = 0.0;  // max(0, center - half_width)
  double ucb = 1.0;  // min(1, center + half_width)
};

/// Selects the confidence estimator used for grid estimates.
enum class EstimatorKind { wskde, nakde };

/// Gaussian product kernel centered at xi evaluated at x:
///   (1/det H) (2*pi)^{-d/2} exp(-|u|^2/2),  u = H^{-1}(x - xi).
/// Symmetric in (x, xi); maximal at x = xi. Allowed to underflow to 0.
double kernel_weight(std::span<const double> x, std::span<const double> xi,
                     const Bandwidth& h);

/// Squared L2 norm of the d-dimensional standard Gaussian kernel,
/// 1 / (2^d sqrt(pi^d)). Converts kernel mass into an effective count.
double kernel_l2sq(std::size_t dim);

/// Running kernel-weighted sums. Both the batch entry points below and the
/// incremental grid accumulators reduce to these three numbers.
struct WeightedMoments {
  double sum_w = 0.0;
  double sum_wy = 0.0;
  double sum_wy2 = 0.0;

  void add(double w, double y) {
    sum_w += w;
    sum_wy += w * y;
    sum_wy2 += w * y * y;
  }
};

/// Accumulates kernel weights of all records against one query point.
WeightedMoments accumulate(std::span<const double> query,
                           std::span<const SampleRecord> data,
                           const Bandwidth& h);

/// Weighted sample mean; empty when the weight sum is zero.
std::optional<double> mean_of(const WeightedMoments& m);

/// Effective sample count (det H / kernel_l2sq) * sum of kernel weights.
double effective_count_of(const WeightedMoments& m, const Bandwidth& h);

/// Kernel-weighted mean of the outcomes at `query`; empty for an empty or
/// fully underflowed dataset. Callers must handle the empty case through the
/// zero-effective-count path.
std::optional<double> kde_mean(std::span<const double> query,
                               std::span<const SampleRecord> data,
                               const Bandwidth& h);

/// Effective number of experiments influencing `query`. Zero for empty data;
/// monotone non-decreasing as records are appended.
double effective_count(std::span<const double> query,
                       std::span<const SampleRecord> data, const Bandwidth& h);

/// Wilson-score estimate from a weighted mean and effective count.
///
///   center     = (n_h m_h + z^2/2) / (n_h + z^2)
///   half_width = z / (n_h + z^2) * sqrt(n_h m_h (1 - m_h) + z^2/4)
///
/// half_width is the full CI half-width; no further z factor applies. For
/// n_h = 0 the mean is irrelevant and the result is exactly center = 0.5,
/// half_width = 0.5 (CI [0,1]).
Estimate ws_estimate(std::optional<double> m_h, double n_h, Confidence conf);

/// Wilson interval for fixed-location Bernoulli replicates; identical to
/// ws_estimate(successes / trials, trials, conf).
Estimate wilson_raw(std::uint64_t successes, std::uint64_t trials,
                    Confidence conf);

Estimate ws_from_moments(const WeightedMoments& m, const Bandwidth& h,
                         Confidence conf);

/// Normal-approximation baseline: center m_h, local weighted second moment
/// s^2 = sum(w y^2)/sum(w) - m_h^2, half-width z sqrt(s^2 / n_h). Undefined
/// (empty optional) when the effective count is zero.
std::optional<Estimate> na_estimate(std::span<const double> query,
                                    std::span<const SampleRecord> data,
                                    const Bandwidth& h, Confidence conf);

std::optional<Estimate> na_from_moments(const WeightedMoments& m,
                                        const Bandwidth& h, Confidence conf);

}  // namespace wskde
