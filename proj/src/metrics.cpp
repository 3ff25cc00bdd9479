#include "wskde/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace wskde {

double coverage(const Grid& grid, const TestFunction& truth,
                EstimatorKind kind) {
  if (grid.dim() != 1)
    throw std::invalid_argument("coverage needs a one-dimensional grid");
  std::size_t covered = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::optional<Estimate> e = grid.estimate_as(i, kind);
    if (!e) continue;  // no interval to cover with
    const double s = truth(grid.point(i)[0]);
    if (e->lcb < s && s < e->ucb) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(grid.size());
}

double lcb_max_fraction(const Grid& grid, const TestFunction& truth) {
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::optional<Estimate>& e = grid.estimate(i);
    if (e && e->lcb > best) best = e->lcb;
  }
  return best / truth.max_value();
}

PruningRates pruning_rates(const Grid& grid, const TestFunction& truth) {
  if (grid.dim() != 1)
    throw std::invalid_argument("pruning rates need a one-dimensional grid");
  std::size_t n_pruned = 0, n_false = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.pruned(i)) continue;
    ++n_pruned;
    if (truth(grid.point(i)[0]) > grid.lcb_max()) ++n_false;
  }
  const double n = static_cast<double>(grid.size());
  return PruningRates{static_cast<double>(n_pruned) / n,
                      static_cast<double>(n_false) / n};
}

const char* to_string(PeakLabel label) {
  switch (label) {
    case PeakLabel::L1:
      return "L1";
    case PeakLabel::L2:
      return "L2";
    case PeakLabel::L3:
      return "L3";
    case PeakLabel::GM:
      return "GM";
  }
  return "?";
}

PeakLabel attribute_peak(const Grid& grid, const TestFunction& truth) {
  if (grid.dim() != 1)
    throw std::invalid_argument("peak attribution needs a one-dimensional grid");
  const std::vector<Peak>& peaks = truth.peaks();
  if (peaks.empty()) throw std::invalid_argument("no catalogued peaks");

  // Argmax of the cached lower bounds, lowest index on ties.
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::optional<Estimate>& e = grid.estimate(i);
    const double lcb = e ? e->lcb : 0.0;
    if (lcb > best) {
      best = lcb;
      best_i = i;
    }
  }

  const double x = grid.point(best_i)[0];
  std::size_t nearest = 0;
  double dist = std::abs(x - peaks[0].x);
  for (std::size_t p = 1; p < peaks.size(); ++p) {
    const double d = std::abs(x - peaks[p].x);
    if (d < dist) {
      dist = d;
      nearest = p;
    }
  }
  if (nearest == peaks.size() - 1) return PeakLabel::GM;
  switch (nearest) {
    case 0:
      return PeakLabel::L1;
    case 1:
      return PeakLabel::L2;
    default:
      return PeakLabel::L3;
  }
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("aggregate needs at least one value");
  // Summing deviations from the first value keeps identical replications
  // exact and conditions the sum well for near-constant inputs.
  const double base = values[0];
  double acc = 0.0;
  for (double v : values) acc += v - base;
  const double mean = base + acc / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return Aggregate{mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

}  // namespace wskde
