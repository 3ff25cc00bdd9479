#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace wskde {

/// Deterministic 64-bit stream (splitmix64). The state advances by a fixed
/// odd constant and each output is a bijective mix of the state, so the n-th
/// draw is a pure function of (seed, n). Identical seeds give identical
/// sequences on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);

  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  /// Seed for replication `index` of a base-seeded experiment: the
  /// (index+1)-th output of a splitmix64 stream seeded with base_seed.
  /// Stateless in index, so replications can run in any order.
  static std::uint64_t derive(std::uint64_t base_seed, std::uint64_t index);

  static constexpr const char* algorithm = "splitmix64";

 private:
  std::uint64_t state_;
};

struct Peak {
  double x;
  double value;
};

/// Ground-truth expectation value used by the simulation experiments:
///
///   S(x) = 0.5 (sin(a x^2) e^{-b (2 pi - x)} + 1)   on [0, 2 pi]
///
/// With the default a = 0.6, b = 0.03 the function has four local maxima of
/// strictly increasing height; the rightmost is the global maximum. The peak
/// catalogue is computed at construction by a dense scan (which also checks
/// the [0,1] range) followed by ternary-search refinement to |dx| < 1e-9.
class TestFunction {
 public:
  TestFunction() : TestFunction(0.6, 0.03) {}
  TestFunction(double a, double b);

  /// Evaluates S(x); throws std::invalid_argument outside the domain.
  double operator()(double x) const;

  double a() const { return a_; }
  double b() const { return b_; }
  static constexpr double domain_lo() { return 0.0; }
  static constexpr double domain_hi() { return 2.0 * std::numbers::pi; }

  /// Local maxima sorted by x.
  const std::vector<Peak>& peaks() const { return peaks_; }

  /// Highest catalogued peak value.
  double max_value() const { return max_value_; }

 private:
  double a_;
  double b_;
  std::vector<Peak> peaks_;
  double max_value_;

  double eval_unchecked(double x) const;
  void scan_peaks();
};

/// Seeded stochastic outcome generator with support on [0,1].
class NoiseModel {
 public:
  enum class Kind { bernoulli, beta, mode_fraction };

  /// Outcome 1 with probability `mean`, else 0.
  static NoiseModel bernoulli();

  /// Beta draw with the given mean and concentration c = alpha + beta.
  /// Degenerate means 0 and 1 are returned exactly.
  static NoiseModel beta(double concentration);

  /// Draws `parts` categorical outcomes from pose_probs and returns the
  /// largest category count divided by `parts`. The expectation is fixed by
  /// (pose_probs, parts); the `mean` argument is ignored.
  static NoiseModel mode_fraction(std::vector<double> pose_probs,
                                  std::uint32_t parts);

  double draw(double mean, RngStream& rng) const;

  Kind kind() const { return kind_; }
  double concentration() const { return concentration_; }
  const std::vector<double>& pose_probs() const { return pose_probs_; }
  std::uint32_t parts() const { return parts_; }

  /// Short label for output metadata, e.g. "beta(c=5)".
  std::string label() const;

 private:
  NoiseModel() = default;

  Kind kind_ = Kind::bernoulli;
  double concentration_ = 0.0;
  std::vector<double> pose_probs_;
  std::uint32_t parts_ = 0;
};

}  // namespace wskde
