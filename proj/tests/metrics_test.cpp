#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wskde/metrics.hpp"
#include "wskde/objectives.hpp"
#include "wskde/optimizer.hpp"

using namespace wskde;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Grid eval_grid(std::size_t points, EstimatorKind kind) {
  return Grid(Box{{0.0}, {two_pi}}, {two_pi / static_cast<double>(points - 1)},
              Bandwidth(0.02), Confidence(1.96), kind);
}

// Independent strict-containment count used to cross-check coverage().
double manual_coverage(const Grid& g, const TestFunction& tf,
                       EstimatorKind kind) {
  std::size_t covered = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto e = g.estimate_as(i, kind);
    if (!e) continue;
    const double s = tf(g.point(i)[0]);
    if (e->lcb < s && s < e->ucb) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(g.size());
}

}  // namespace

TEST_CASE("coverage of an empty Wilson-score grid is exactly one") {
  const TestFunction tf;
  const Grid g = eval_grid(1001, EstimatorKind::wskde);
  CHECK(g.size() == 1001);
  CHECK(coverage(g, tf, EstimatorKind::wskde) == 1.0);
}

TEST_CASE("coverage agrees with a manual strict-containment count") {
  const TestFunction tf;
  const NoiseModel nm = NoiseModel::bernoulli();
  RngStream rng(301);
  Grid g = eval_grid(1001, EstimatorKind::wskde);
  for (int i = 0; i < 60; ++i) {
    const std::vector<double> x{rng.uniform(0.0, two_pi)};
    g.ingest(x, nm.draw(tf(x[0]), rng));
  }
  for (EstimatorKind kind : {EstimatorKind::wskde, EstimatorKind::nakde}) {
    CHECK(coverage(g, tf, kind) == manual_coverage(g, tf, kind));
  }
}

TEST_CASE("undefined estimates provide no interval and are not covered") {
  const TestFunction tf;
  Grid g = eval_grid(1001, EstimatorKind::nakde);
  // All samples in one tight cluster: everything further than the kernel
  // reach keeps a zero weight sum.
  const std::vector<double> x{3.0};
  for (int i = 0; i < 20; ++i) g.ingest(x, (i % 2) ? 1.0 : 0.0);
  const double cov_na = coverage(g, tf, EstimatorKind::nakde);
  CHECK(cov_na < 0.5);

  // The Wilson-score estimator keeps a full [0,1] interval at those points
  // and the default function is strictly interior, so it covers them all.
  std::size_t zero_count_points = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.moments(i).sum_w == 0.0) {
      ++zero_count_points;
      const auto e = g.estimate_as(i, EstimatorKind::wskde);
      const double s = tf(g.point(i)[0]);
      CHECK((e->lcb < s && s < e->ucb));
    }
  }
  CHECK(zero_count_points > 0);
}

TEST_CASE("lcb_max_fraction starts at zero and tracks the best lower bound") {
  const TestFunction tf;
  Grid g = eval_grid(315, EstimatorKind::wskde);
  CHECK(lcb_max_fraction(g, tf) == 0.0);

  const std::vector<double> x{5.834};
  for (int i = 0; i < 50; ++i) g.ingest(x, 1.0);
  g.refresh();
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    best = std::max(best, g.estimate(i)->lcb);
  CHECK(lcb_max_fraction(g, tf) ==
        doctest::Approx(best / tf.max_value()).epsilon(1e-15));
  CHECK(tf.max_value() == doctest::Approx(0.993309869369).epsilon(1e-9));
}

TEST_CASE("pruning rates follow their definitions") {
  const TestFunction tf;
  Grid g = eval_grid(315, EstimatorKind::wskde);
  g.prune();
  PruningRates r = pruning_rates(g, tf);
  CHECK(r.i_tot == 0.0);
  CHECK(r.i_false == 0.0);

  // Strong certain outcomes near the first peak prune the troughs; some
  // pruned points may still have S above the resulting lower bound.
  RngStream rng(311);
  const NoiseModel nm = NoiseModel::bernoulli();
  for (int i = 0; i < 3000; ++i) {
    const std::size_t idx = g.select_next(rng);
    g.ingest(g.point(idx), nm.draw(tf(g.point(idx)[0]), rng));
    g.refresh();
    g.prune();
  }
  r = pruning_rates(g, tf);
  CHECK(r.i_tot > 0.0);
  CHECK(r.i_false <= r.i_tot);

  std::size_t pruned = 0, false_pruned = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.pruned(i)) continue;
    ++pruned;
    if (tf(g.point(i)[0]) > g.lcb_max()) ++false_pruned;
  }
  CHECK(r.i_tot == static_cast<double>(pruned) / g.size());
  CHECK(r.i_false == static_cast<double>(false_pruned) / g.size());
}

TEST_CASE("peak attribution maps the best point to the nearest peak") {
  const TestFunction tf;

  Grid near_gm = eval_grid(315, EstimatorKind::wskde);
  const std::vector<double> gm{5.84};
  for (int i = 0; i < 40; ++i) near_gm.ingest(gm, 1.0);
  near_gm.refresh();
  CHECK(attribute_peak(near_gm, tf) == PeakLabel::GM);

  Grid near_l1 = eval_grid(315, EstimatorKind::wskde);
  const std::vector<double> l1{1.60};
  for (int i = 0; i < 40; ++i) near_l1.ingest(l1, 1.0);
  near_l1.refresh();
  CHECK(attribute_peak(near_l1, tf) == PeakLabel::L1);

  Grid near_l3 = eval_grid(315, EstimatorKind::wskde);
  const std::vector<double> l3{4.86};
  for (int i = 0; i < 40; ++i) near_l3.ingest(l3, 1.0);
  near_l3.refresh();
  CHECK(attribute_peak(near_l3, tf) == PeakLabel::L3);

  CHECK(std::string(to_string(PeakLabel::GM)) == "GM");
  CHECK(std::string(to_string(PeakLabel::L2)) == "L2");
}

TEST_CASE("peak attribution ignores the scale of the lower bounds") {
  // Rescaling all confidence levels moves every lower bound monotonically,
  // which must not change the argmax and hence not the label.
  const TestFunction tf;
  const NoiseModel nm = NoiseModel::bernoulli();
  RngStream rng(317);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 500; ++i) {
    xs.push_back({rng.uniform(0.0, two_pi)});
    ys.push_back(nm.draw(tf(xs.back()[0]), rng));
  }
  PeakLabel first = PeakLabel::L1;
  bool first_set = false;
  for (double z : {1.0, 1.96, 3.0}) {
    Grid g(Box{{0.0}, {two_pi}}, {0.02}, Bandwidth(0.02), Confidence(z),
           EstimatorKind::wskde);
    for (std::size_t i = 0; i < xs.size(); ++i) g.ingest(xs[i], ys[i]);
    g.refresh();
    const PeakLabel label = attribute_peak(g, tf);
    if (!first_set) {
      first = label;
      first_set = true;
    } else {
      CHECK(label == first);
    }
  }
}

TEST_CASE("aggregate computes mean and population deviation") {
  const std::vector<double> single{0.7};
  CHECK(aggregate(single).mean == 0.7);
  CHECK(aggregate(single).stddev == 0.0);

  const std::vector<double> pair{0.9, 1.0};
  CHECK(aggregate(pair).mean == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(aggregate(pair).stddev == doctest::Approx(0.05).epsilon(1e-12));

  const std::vector<double> constant(100, 0.321);
  CHECK(aggregate(constant).mean == 0.321);
  CHECK(aggregate(constant).stddev == 0.0);

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}
