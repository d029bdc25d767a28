#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "devex/exponents.hpp"
#include "oracles.hpp"

using namespace devex;

namespace {

HypothesisPair example1() {
  return make_hypothesis_pair(make_pmf({"0", "1"}, {0.4, 0.6}), make_pmf({"0", "1"}, {0.6, 0.4}));
}

HypothesisPair example2() {
  return make_hypothesis_pair(make_pmf({"0", "1"}, {0.51, 0.49}), make_pmf({"0", "1"}, {0.49, 0.51}));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected devex::Error";
  return ErrorKind::DomainError;
}

HypothesisPair random_pair(std::mt19937_64& rng, std::size_t k) {
  const auto labels = oracle::labels(k);
  return make_hypothesis_pair(make_pmf(labels, oracle::random_pmf(rng, k)),
                              make_pmf(labels, oracle::random_pmf(rng, k)));
}

Thresholds random_thresholds(std::mt19937_64& rng, const HypothesisPair& pair) {
  const double lo = -kl_divergence(pair.p2, pair.p1);
  const double hi = kl_divergence(pair.p1, pair.p2);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  double a = lo + (hi - lo) * u(rng);
  double b = lo + (hi - lo) * u(rng);
  if (a > b) std::swap(a, b);
  return {b, a};
}

}  // namespace

TEST(Thresholds, Admissibility) {
  const auto e1 = example1();
  EXPECT_NO_THROW(require_admissible(e1, Thresholds{}));
  EXPECT_EQ(kind_of([&] { require_admissible(e1, Thresholds{0.9, 0.0}); }), ErrorKind::InadmissibleThresholds);
  EXPECT_EQ(kind_of([&] { require_admissible(e1, Thresholds{0.0, 0.01}); }), ErrorKind::InadmissibleThresholds);
  const double d12 = kl_divergence(e1.p1, e1.p2);
  EXPECT_EQ(kind_of([&] { require_admissible(e1, Thresholds::single(d12)); }), ErrorKind::InadmissibleThresholds);
}

TEST(RateFunction, EndpointsOfTheAdmissibleRange) {
  const auto e1 = example1();
  const double d12 = kl_divergence(e1.p1, e1.p2);
  const double d21 = kl_divergence(e1.p2, e1.p1);
  const auto at_mean = rate_function(e1, -d12);
  EXPECT_NEAR(at_mean.value, 0.0, 1e-12);
  EXPECT_NEAR(at_mean.t_star, 0.0, 1e-10);
  const auto at_one = rate_function(e1, d21);
  EXPECT_NEAR(at_one.value - d21, 0.0, 1e-12);
  EXPECT_NEAR(at_one.t_star, 1.0, 1e-10);
}

TEST(RateFunction, ExampleOneAtZero) {
  const auto r = rate_function(example1(), 0.0);
  EXPECT_NEAR(r.value, 2.04e-2, 5e-5);
  EXPECT_NEAR(r.t_star, 0.5, 1e-10);
  EXPECT_NEAR(r.value, r.t_star * 0.0 - log_mgf(example1(), r.t_star), 1e-15);
}

TEST(RateFunction, OutOfDomain) {
  const auto e1 = example1();
  const double edge = std::log(1.5);
  EXPECT_EQ(kind_of([&] { rate_function(e1, edge); }), ErrorKind::OutOfDomain);
  EXPECT_EQ(kind_of([&] { rate_function(e1, -edge - 0.1); }), ErrorKind::OutOfDomain);
}

TEST(RateFunction, FarTailNeedsBracketExpansion) {
  const auto e1 = example1();
  const double r = 0.99 * std::log(1.5);
  const auto res = rate_function(e1, r);
  EXPECT_GT(res.t_star, 1.0);
  const oracle::GridLegendre grid(e1.p1.probs(), e1.p2.probs(), -8.0, 8.0, 1e-4);
  EXPECT_NEAR(res.value, grid.sup(r), 1e-9);
}

TEST(RateFunction, MatchesGridOracleOnRandomPairs) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 15; ++rep) {
    const auto pair = random_pair(rng, 2 + rep % 5);
    const oracle::GridLegendre grid(pair.p1.probs(), pair.p2.probs(), -8.0, 8.0, 1e-4);
    const double lo = -kl_divergence(pair.p1, pair.p2);
    const double hi = kl_divergence(pair.p2, pair.p1);
    for (int k = 0; k < 10; ++k) {
      const double r = lo + (hi - lo) * (k + 0.5) / 10.0;
      const auto res = rate_function(pair, r);
      EXPECT_NEAR(res.value, grid.sup(r), 1e-8);
      EXPECT_NEAR(res.value, res.t_star * r - log_mgf(pair, res.t_star), 1e-15);
    }
  }
}

TEST(Chernoff, Values) {
  const auto p = make_pmf({"a", "b", "c"}, {0.2, 0.3, 0.5});
  EXPECT_NEAR(chernoff_information(make_hypothesis_pair(p, p)).value, 0.0, 1e-15);
  const auto c1 = chernoff_information(example1());
  EXPECT_NEAR(c1.value, 2.04e-2, 5e-5);
  EXPECT_NEAR(c1.value, -std::log(2.0 * std::sqrt(0.24)), 1e-15);
  EXPECT_NEAR(c1.t_star, 0.5, 1e-6);
  const auto c2 = chernoff_information(example2());
  EXPECT_NEAR(c2.value, 2.000e-4, 5e-7);
  EXPECT_NEAR(c2.value, -0.5 * std::log(4.0 * 0.49 * 0.51), 1e-15);
}

TEST(Chernoff, SymmetricAndEqualToRateAtZero) {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const auto pair = random_pair(rng, 2 + rep % 5);
    const double c = chernoff_information(pair).value;
    EXPECT_NEAR(c, chernoff_information(swapped(pair)).value, 1e-12);
    EXPECT_NEAR(rate_function(pair, 0.0).value, c, 1e-10);
  }
}

TEST(ExactExponents, ZeroThresholdGivesChernoff) {
  const auto e = exact_exponents(example1(), Thresholds{});
  const double c = chernoff_information(example1()).value;
  EXPECT_NEAR(e.pe1, c, 1e-12);
  EXPECT_NEAR(e.pe2, c, 1e-12);
  EXPECT_NEAR(e.pe2, 2.04e-2, 5e-5);
}

TEST(ExactExponents, SingleThresholdCollapses) {
  const auto e1 = example1();
  const double lambda = 0.03;
  const auto e = exact_exponents(e1, Thresholds::single(lambda));
  const double i = rate_function(e1, -lambda).value;
  EXPECT_NEAR(e.pe1, std::min(i, i + lambda), 1e-15);
  EXPECT_NEAR(e.pe2, e.pe1, 1e-15);
}

TEST(ExactExponents, ErasureWindowAgainstGridOracle) {
  const auto e1 = example1();
  const oracle::GridLegendre grid(e1.p1.probs(), e1.p2.probs(), -5.0, 5.0, 1e-5);
  const auto e = exact_exponents(e1, Thresholds{0.02, -0.02});
  const double r1 = -0.02, r2 = 0.02;
  EXPECT_NEAR(e.alpha1, grid.sup(r1), 1e-10);
  EXPECT_NEAR(e.alpha2, grid.sup(r2), 1e-10);
  EXPECT_NEAR(e.beta1, grid.sup(r2) - r2, 1e-10);
  EXPECT_NEAR(e.beta2, grid.sup(r1) - r1, 1e-10);
  EXPECT_NEAR(e.pe1, std::min(grid.sup(r1), grid.sup(r2) - r2), 1e-10);
  EXPECT_NEAR(e.pe2, std::min(grid.sup(r2), grid.sup(r1) - r1), 1e-10);
  EXPECT_EQ(kind_of([&] { exact_exponents(e1, Thresholds{0.9, 0.0}); }), ErrorKind::InadmissibleThresholds);
}

TEST(LowerBounds, ExampleOneZeroThreshold) {
  const auto e1 = example1();
  const auto refined = refined_lower_bounds(e1, Thresholds{});
  EXPECT_NEAR(refined.inputs.delta[0][0], 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(refined.exponents.at(1, 2), binary_kl(0.5, 0.4), 1e-14);
  EXPECT_NEAR(refined.exponents.at(1, 2), 2.041e-2, 1e-5);
  const auto azuma = azuma_lower_bounds(e1, Thresholds{});
  EXPECT_NEAR(azuma.exponents.min_for(2), 1.0 / 72.0, 1e-12);
  EXPECT_NEAR(azuma_error_exponent_lb(e1), 1.39e-2, 5e-5);
}

TEST(LowerBounds, ExampleTwoZeroThreshold) {
  EXPECT_NEAR(refined_error_exponent_lb(example2()), 1.997e-4, 5e-7);
}

TEST(LowerBounds, EpsilonDefinitions) {
  const auto e1 = example1();
  const Thresholds th{0.03, -0.01};
  const auto in = refined_lower_bounds(e1, th).inputs;
  const double d12 = kl_divergence(e1.p1, e1.p2);
  const double d21 = kl_divergence(e1.p2, e1.p1);
  EXPECT_DOUBLE_EQ(in.epsilon[0][0], d12 - 0.03);
  EXPECT_DOUBLE_EQ(in.epsilon[1][0], d21 - 0.01);
  EXPECT_DOUBLE_EQ(in.epsilon[0][1], d12 + 0.01);
  EXPECT_DOUBLE_EQ(in.epsilon[1][1], d21 + 0.03);
}

TEST(LowerBounds, DegenerateAndNearIdentical) {
  const auto p = make_pmf({"a", "b"}, {0.3, 0.7});
  EXPECT_EQ(kind_of([&] { refined_lower_bounds(make_hypothesis_pair(p, p), Thresholds{}); }),
            ErrorKind::DegenerateIncrements);
  const auto near = make_hypothesis_pair(p, make_pmf({"a", "b"}, {0.3 + 1e-6, 0.7 - 1e-6}));
  EXPECT_LT(refined_error_exponent_lb(near), 1e-11);
  EXPECT_LT(azuma_error_exponent_lb(near), 1e-11);
}

TEST(CompareReport, ExampleOne) {
  const auto rep = compare_report(example1(), Thresholds{});
  EXPECT_NEAR(rep.exact.pe2, 2.04e-2, 5e-5);
  EXPECT_NEAR(rep.azuma.min_for(2), 1.0 / 72.0, 1e-12);
  EXPECT_NEAR(rep.inputs.gamma[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.inputs.gamma[1], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.refined.min_for(2), binary_kl(0.5, 0.4), 1e-14);
  EXPECT_NEAR(rep.inverse_gamma[0], 1.5, 1e-12);
  EXPECT_NEAR(rep.cross_weighted_gamma2, 7.0 / 9.0, 1e-12);
  EXPECT_NEAR(rep.cross_weighted_refined_min[1], 1.77e-2, 5e-5);
  EXPECT_GT(rep.improvement[0][1], 1.0);
}

TEST(Properties, OrderingOnRandomInstances) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 150; ++rep) {
    const auto pair = random_pair(rng, 4);
    const auto th = random_thresholds(rng, pair);
    const auto r = compare_report(pair, th);
    for (int j = 1; j <= 2; ++j) {
      EXPECT_LE(r.azuma.min_for(j), r.refined.min_for(j) + 1e-12);
    }
    EXPECT_LE(r.refined.min_for(1), r.exact.pe1 + 1e-12);
    EXPECT_LE(r.refined.min_for(2), r.exact.pe2 + 1e-12);
    // Component level: each bound sits below the exponent of the event it bounds.
    EXPECT_LE(r.refined.at(1, 1), r.exact.alpha1 + 1e-12);
    EXPECT_LE(r.refined.at(1, 2), r.exact.alpha2 + 1e-12);
    EXPECT_LE(r.refined.at(2, 1), r.exact.beta1 + 1e-12);
    EXPECT_LE(r.refined.at(2, 2), r.exact.beta2 + 1e-12);
  }
}

TEST(Properties, ErasureMonotonicity) {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 60; ++rep) {
    const auto pair = random_pair(rng, 3);
    const double lo = -kl_divergence(pair.p2, pair.p1);
    const double hi = kl_divergence(pair.p1, pair.p2);
    const double centre = lo + (hi - lo) * 0.5;
    double prev1 = INFINITY, prev2 = -INFINITY;
    for (double w = 0.0; w < 0.45; w += 0.05) {
      const Thresholds th{centre + w * (hi - lo), centre - w * (hi - lo)};
      const auto e = exact_exponents(pair, th);
      EXPECT_LE(e.pe1, prev1 + 1e-12);
      EXPECT_GE(e.pe2, prev2 - 1e-12);
      prev1 = e.pe1;
      prev2 = e.pe2;
    }
  }
}

TEST(Properties, RateFunctionConvexNonnegative) {
  std::mt19937_64 rng(25);
  for (int rep = 0; rep < 30; ++rep) {
    const auto pair = random_pair(rng, 2 + rep % 5);
    const double lo = -kl_divergence(pair.p1, pair.p2);
    const double hi = kl_divergence(pair.p2, pair.p1);
    std::vector<double> vals;
    for (int k = 0; k <= 40; ++k) vals.push_back(rate_function(pair, lo + (hi - lo) * k / 40.0).value);
    for (std::size_t k = 0; k < vals.size(); ++k) {
      EXPECT_GE(vals[k], 0.0);
      if (k > 0 && k + 1 < vals.size()) EXPECT_LE(vals[k], 0.5 * (vals[k - 1] + vals[k + 1]) + 1e-12);
    }
  }
}
