#pragma once

#include <span>
#include <utility>

#include "wskde/objectives.hpp"
#include "wskde/optimizer.hpp"

namespace wskde {

/// Fraction of grid points whose true value lies strictly inside the
/// estimated confidence interval (lcb < S(x) < ucb). A point with an
/// undefined estimate provides no interval and counts as not covered.
/// Estimates are recomputed from the accumulators, so no refresh is needed.
double coverage(const Grid& grid, const TestFunction& truth,
                EstimatorKind kind);

/// Highest cached lower bound divided by the ground-truth maximum.
double lcb_max_fraction(const Grid& grid, const TestFunction& truth);

struct PruningRates {
  double i_tot;    // pruned fraction of the grid
  double i_false;  // fraction pruned despite S(x) above the current lcb_max
};

/// Pruning rates from the grid's current marking (call prune() first).
PruningRates pruning_rates(const Grid& grid, const TestFunction& truth);

enum class PeakLabel { L1, L2, L3, GM };

const char* to_string(PeakLabel label);

/// Assigns the grid point with the highest cached lower bound to the nearest
/// catalogued peak (ties to the lower-index peak). The rightmost peak is the
/// global maximum GM; the others are L1..L3 left to right.
PeakLabel attribute_peak(const Grid& grid, const TestFunction& truth);

struct Aggregate {
  double mean;
  double stddev;  // population (1/N) standard deviation
};

/// Mean and population standard deviation across replications.
Aggregate aggregate(std::span<const double> values);

}  // namespace wskde
