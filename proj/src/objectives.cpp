#include "wskde/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wskde {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double standard_normal(RngStream& rng) {
  // Box-Muller, one value per call.
  double u1;
  do {
    u1 = rng.next_double();
  } while (u1 <= 0.0);
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Marsaglia-Tsang; shapes below 1 are boosted via Gamma(a+1) U^{1/a}.
double gamma_draw(RngStream& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.next_double();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below needs n > 0");
  // Rejection below 2^64 mod n keeps the modulo unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r < threshold);
  return r % n;
}

std::uint64_t RngStream::derive(std::uint64_t base_seed, std::uint64_t index) {
  RngStream s(base_seed + index * 0x9E3779B97F4A7C15ull);
  return s.next_u64();
}

TestFunction::TestFunction(double a, double b) : a_(a), b_(b) {
  if (!(std::isfinite(a) && a > 0.0))
    throw std::invalid_argument("test function requires a > 0");
  if (!(std::isfinite(b) && b >= 0.0))
    throw std::invalid_argument("test function requires b >= 0");
  scan_peaks();
}

double TestFunction::eval_unchecked(double x) const {
  return 0.5 * (std::sin(a_ * x * x) * std::exp(-b_ * (two_pi - x)) + 1.0);
}

double TestFunction::operator()(double x) const {
  if (!(x >= domain_lo() && x <= domain_hi()))
    throw std::invalid_argument("test function argument outside [0, 2*pi]");
  return eval_unchecked(x);
}

void TestFunction::scan_peaks() {
  // One dense pass checks the [0,1] range and brackets interior maxima;
  // each bracket is then narrowed by ternary search.
  constexpr std::size_t scan_points = 1'000'000;
  const double step = (domain_hi() - domain_lo()) / (scan_points - 1);

  double prev2 = eval_unchecked(domain_lo());
  double prev1 = eval_unchecked(domain_lo() + step);
  if (!(prev2 >= 0.0 && prev2 <= 1.0) || !(prev1 >= 0.0 && prev1 <= 1.0))
    throw std::invalid_argument("test function leaves [0,1]");

  for (std::size_t i = 2; i < scan_points; ++i) {
    const double x = domain_lo() + static_cast<double>(i) * step;
    const double v = eval_unchecked(x);
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("test function leaves [0,1]");
    if (prev1 > prev2 && prev1 >= v) {
      double lo = x - 2.0 * step;
      double hi = x;
      while (hi - lo > 1e-9) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (eval_unchecked(m1) < eval_unchecked(m2))
          lo = m1;
        else
          hi = m2;
      }
      const double px = 0.5 * (lo + hi);
      peaks_.push_back(Peak{px, eval_unchecked(px)});
    }
    prev2 = prev1;
    prev1 = v;
  }

  max_value_ = 0.0;
  for (const Peak& p : peaks_) max_value_ = std::max(max_value_, p.value);
}

NoiseModel NoiseModel::bernoulli() {
  NoiseModel nm;
  nm.kind_ = Kind::bernoulli;
  return nm;
}

NoiseModel NoiseModel::beta(double concentration) {
  if (!(std::isfinite(concentration) && concentration > 0.0))
    throw std::invalid_argument("beta concentration must be positive");
  NoiseModel nm;
  nm.kind_ = Kind::beta;
  nm.concentration_ = concentration;
  return nm;
}

NoiseModel NoiseModel::mode_fraction(std::vector<double> pose_probs,
                                     std::uint32_t parts) {
  if (pose_probs.empty())
    throw std::invalid_argument("mode_fraction needs at least one category");
  if (parts < 1) throw std::invalid_argument("mode_fraction needs parts >= 1");
  double sum = 0.0;
  for (double p : pose_probs) {
    if (!(std::isfinite(p) && p >= 0.0))
      throw std::invalid_argument("pose probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("pose probabilities must sum to 1");
  NoiseModel nm;
  nm.kind_ = Kind::mode_fraction;
  nm.pose_probs_ = std::move(pose_probs);
  nm.parts_ = parts;
  return nm;
}

double NoiseModel::draw(double mean, RngStream& rng) const {
  if (!(mean >= 0.0 && mean <= 1.0))
    throw std::invalid_argument("draw mean must lie in [0,1]");
  switch (kind_) {
    case Kind::bernoulli:
      return rng.next_double() < mean ? 1.0 : 0.0;
    case Kind::beta: {
      // Parameters vanish at the boundary; return the distributional limit.
      if (mean <= 0.0) return 0.0;
      if (mean >= 1.0) return 1.0;
      const double g1 = gamma_draw(rng, mean * concentration_);
      const double g2 = gamma_draw(rng, (1.0 - mean) * concentration_);
      if (g1 + g2 == 0.0) return mean;
      return g1 / (g1 + g2);
    }
    case Kind::mode_fraction: {
      std::vector<std::uint32_t> counts(pose_probs_.size(), 0);
      for (std::uint32_t p = 0; p < parts_; ++p) {
        const double u = rng.next_double();
        double cum = 0.0;
        std::size_t cat = pose_probs_.size() - 1;
        for (std::size_t k = 0; k < pose_probs_.size(); ++k) {
          cum += pose_probs_[k];
          if (u < cum) {
            cat = k;
            break;
          }
        }
        ++counts[cat];
      }
      const std::uint32_t top = *std::max_element(counts.begin(), counts.end());
      return static_cast<double>(top) / static_cast<double>(parts_);
    }
  }
  throw std::logic_error("unreachable noise kind");
}

std::string NoiseModel::label() const {
  char buf[64];
  switch (kind_) {
    case Kind::bernoulli:
      return "bernoulli";
    case Kind::beta:
      std::snprintf(buf, sizeof(buf), "beta(c=%g)", concentration_);
      return buf;
    case Kind::mode_fraction:
      std::snprintf(buf, sizeof(buf), "mode_fraction(m=%u)", parts_);
      return buf;
  }
  return "unknown";
}

}  // namespace wskde
