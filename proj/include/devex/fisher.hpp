#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "devex/error.hpp"
#include "devex/exponents.hpp"
#include "devex/probdist.hpp"

// One-parameter pmf families, Fisher information, and the small-offset limits
// of divergence, Chernoff information and the exponent lower bounds.

namespace devex {

// theta -> pmf on a fixed alphabet over the open interval (lower, upper).
// The evaluators must be reentrant; score is optional (empty = use finite
// differences).
struct ParametricFamily {
  std::string name;
  double lower;
  double upper;
  std::vector<std::string> labels;
  std::function<std::vector<double>(double)> probs;
  std::function<std::vector<double>(double)> score;

  bool contains(double theta) const { return theta > lower && theta < upper; }

  Pmf at(double theta) const {
    if (!contains(theta)) {
      throw Error(ErrorKind::OutOfDomain, name + ": theta = " + std::to_string(theta) + " outside (" +
                                              std::to_string(lower) + ", " + std::to_string(upper) + ")");
    }
    return make_pmf(labels, probs(theta));
  }
};

// P(0) = 1 - theta, P(1) = theta on (0, 1).
inline ParametricFamily bernoulli_family() {
  return ParametricFamily{
      "bernoulli",
      0.0,
      1.0,
      {"0", "1"},
      [](double t) { return std::vector<double>{1.0 - t, t}; },
      [](double t) { return std::vector<double>{-1.0 / (1.0 - t), 1.0 / t}; },
  };
}

// P(0) = theta(1-alpha)/(1+theta), P(1) = alpha, P(2) = (1-alpha)/(1+theta) on (0, inf).
inline ParametricFamily ternary_family(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::DomainError, "ternary family needs alpha in (0,1)");
  return ParametricFamily{
      "ternary",
      0.0,
      std::numeric_limits<double>::infinity(),
      {"0", "1", "2"},
      [alpha](double t) {
        return std::vector<double>{t * (1.0 - alpha) / (1.0 + t), alpha, (1.0 - alpha) / (1.0 + t)};
      },
      [](double t) { return std::vector<double>{1.0 / (t * (1.0 + t)), 0.0, -1.0 / (1.0 + t)}; },
  };
}

// J(theta) = E_theta[(d/dtheta ln P_theta(X))^2]; analytic score when the
// family has one, central differences with step h otherwise.
inline double fisher_information(const ParametricFamily& family, double theta, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::DomainError, "step h must be positive");
  if (!family.contains(theta - h) || !family.contains(theta + h)) {
    throw Error(ErrorKind::OutOfDomain, "theta +/- h leaves the parameter domain");
  }
  const Pmf p = family.at(theta);
  std::vector<double> score;
  if (family.score) {
    score = family.score(theta);
  } else {
    const Pmf up = family.at(theta + h);
    const Pmf down = family.at(theta - h);
    score.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      score[i] = (up.log_probs()[i] - down.log_probs()[i]) / (2.0 * h);
    }
  }
  double j = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) j += p[i] * score[i] * score[i];
  return j;
}

// Value at x = 0 of the polynomial through (xs[k], ys[k]) (Neville's scheme).
inline double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.empty()) throw Error(ErrorKind::DomainError, "extrapolation needs matching points");
  std::vector<double> p(ys.begin(), ys.end());
  const std::size_t n = xs.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
    }
  }
  return p[0];
}

enum class OffsetDirection { Up, Down };

struct LimitRatios {
  double h;
  double divergence_ratio;
  double chernoff_ratio;
  double el_ratio;
  double loosened_ratio;
};

struct FisherLimitReport {
  double theta = 0.0;
  double j = 0.0;
  std::vector<LimitRatios> rows;
  LimitRatios limits{};  // h = 0
  double a_theta = 0.0;
};

inline constexpr double kMinOffset = 1e-7;

// Ratios of D, C, E_L and the Azuma bound to h^2 for theta' = theta +/- h,
// extrapolated to h -> 0. Targets: J/2, J/8, J/8 and a(theta) J/8.
inline FisherLimitReport limit_ratios(const ParametricFamily& family, double theta,
                                      std::span<const double> offsets,
                                      OffsetDirection direction = OffsetDirection::Up) {
  if (offsets.empty()) throw Error(ErrorKind::DomainError, "offset list is empty");
  for (double h : offsets) {
    if (!(h > 0.0)) throw Error(ErrorKind::DomainError, "offsets must be positive");
    if (h < kMinOffset) {
      throw Error(ErrorKind::DegenerateIncrements, "offset below 1e-7 cannot be resolved in double precision");
    }
    if (!family.contains(theta - h) || !family.contains(theta + h)) {
      throw Error(ErrorKind::OutOfDomain, "theta +/- offset leaves the parameter domain");
    }
  }

  FisherLimitReport rep;
  rep.theta = theta;
  rep.j = fisher_information(family, theta, std::min(1e-5, offsets[0]));
  const Pmf base = family.at(theta);
  const double sign = direction == OffsetDirection::Up ? 1.0 : -1.0;

  std::vector<double> hs;
  std::vector<double> cols[4];
  for (double h : offsets) {
    const HypothesisPair pair = make_hypothesis_pair(base, family.at(theta + sign * h));
    const double h2 = h * h;
    LimitRatios row{h, kl_divergence(pair.p1, pair.p2) / h2, chernoff_information(pair).value / h2,
                    refined_error_exponent_lb(pair) / h2, azuma_error_exponent_lb(pair) / h2};
    rep.rows.push_back(row);
    hs.push_back(h);
    cols[0].push_back(row.divergence_ratio);
    cols[1].push_back(row.chernoff_ratio);
    cols[2].push_back(row.el_ratio);
    cols[3].push_back(row.loosened_ratio);
  }
  rep.limits = {0.0, extrapolate_to_zero(hs, cols[0]), extrapolate_to_zero(hs, cols[1]),
                extrapolate_to_zero(hs, cols[2]), extrapolate_to_zero(hs, cols[3])};
  rep.a_theta = rep.j > 0.0 ? rep.limits.loosened_ratio / (rep.j / 8.0) : 0.0;
  return rep;
}

}  // namespace devex
