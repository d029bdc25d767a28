#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "devex/concentration.hpp"
#include "devex/error.hpp"
#include "devex/probdist.hpp"

// Large-deviation exponents of the log-likelihood-ratio test with an erasure
// window, and the martingale-based lower bounds on them.
//
// Conventions: L = sum_i ln(P1(X_i)/P2(X_i)). H1 is chosen when L > n*lambda_upper,
// H2 when L < n*lambda_lower, otherwise an erasure is declared.
//   alpha1 = P1(L <= n lambda_upper)   error or erasure under H1
//   alpha2 = P1(L <= n lambda_lower)   error under H1
//   beta1  = P2(L >= n lambda_lower)   error or erasure under H2
//   beta2  = P2(L >= n lambda_upper)   error under H2

namespace devex {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kThresholdGuard = 1e-12;

struct Thresholds {
  double lambda_upper = 0.0;
  double lambda_lower = 0.0;

  static Thresholds single(double lambda) { return {lambda, lambda}; }
};

// Requires -D(P2||P1) < lambda_lower <= lambda_upper < D(P1||P2), with a guard band.
inline void require_admissible(const HypothesisPair& pair, const Thresholds& th) {
  const double d12 = kl_divergence(pair.p1, pair.p2);
  const double d21 = kl_divergence(pair.p2, pair.p1);
  const bool ok = std::isfinite(th.lambda_upper) && std::isfinite(th.lambda_lower) &&
                  th.lambda_lower <= th.lambda_upper && th.lambda_lower > -d21 + kThresholdGuard &&
                  th.lambda_upper < d12 - kThresholdGuard;
  if (!ok) {
    throw Error(ErrorKind::InadmissibleThresholds,
                "thresholds must satisfy " + std::to_string(-d21) + " < lambda_lower <= lambda_upper < " +
                    std::to_string(d12));
  }
}

struct RateFunctionResult {
  double value;
  double t_star;
};

// I(r) = sup_t (t r - H(t)), solved through H'(t) = r by bisection.
inline RateFunctionResult rate_function(const HypothesisPair& pair, double r) {
  constexpr double kTol = 1e-12;
  constexpr double kMaxT = 64.0;
  constexpr int kMaxIter = 200;

  const auto& l1 = pair.p1.log_probs();
  const auto& l2 = pair.p2.log_probs();
  double lo_r = kInfinity;
  double hi_r = -kInfinity;
  for (std::size_t i = 0; i < l1.size(); ++i) {
    lo_r = std::min(lo_r, l2[i] - l1[i]);
    hi_r = std::max(hi_r, l2[i] - l1[i]);
  }
  if (!(r > lo_r && r < hi_r)) {
    throw Error(ErrorKind::OutOfDomain, "r = " + std::to_string(r) + " is outside the open range (" +
                                            std::to_string(lo_r) + ", " + std::to_string(hi_r) + ")");
  }

  double lo = 0.0;
  double hi = 1.0;
  while (log_mgf_derivative(pair, lo) > r) {
    if (lo <= -kMaxT) throw Error(ErrorKind::OutOfDomain, "maximizer beyond |t| = 64");
    hi = lo;
    lo = lo == 0.0 ? -1.0 : 2.0 * lo;
  }
  while (log_mgf_derivative(pair, hi) < r) {
    if (hi >= kMaxT) throw Error(ErrorKind::OutOfDomain, "maximizer beyond |t| = 64");
    lo = hi;
    hi = 2.0 * hi;
  }

  int iter = 0;
  while (hi - lo > kTol) {
    if (++iter > kMaxIter) throw Error(ErrorKind::NoConvergence, "rate function bisection");
    const double mid = 0.5 * (lo + hi);
    if (log_mgf_derivative(pair, mid) < r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  return {std::max(0.0, t * r - log_mgf(pair, t)), t};
}

struct ChernoffResult {
  double value;
  double t_star;
};

// C(P1,P2) = -min_{t in [0,1]} H(t), golden-section search plus a parabolic polish.
inline ChernoffResult chernoff_information(const HypothesisPair& pair) {
  constexpr double kTol = 1e-12;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto h = [&](double t) { return log_mgf(pair, t); };

  double a = 0.0;
  double b = 1.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = h(c);
  double fd = h(d);
  while (b - a > kTol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = h(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = h(d);
    }
  }
  double t = 0.5 * (a + b);
  double best = h(t);

  // Vertex of the parabola through three nearby points.
  const double step = 1e-4;
  const double t0 = std::clamp(t - step, 0.0, 1.0);
  const double t2 = std::clamp(t + step, 0.0, 1.0);
  if (t2 - t0 > 1.5 * step) {
    const double f0 = h(t0);
    const double f2 = h(t2);
    const double denom = (t - t0) * (best - f2) - (t - t2) * (best - f0);
    if (denom != 0.0) {
      const double tv = t - 0.5 * ((t - t0) * (t - t0) * (best - f2) - (t - t2) * (t - t2) * (best - f0)) / denom;
      if (tv >= 0.0 && tv <= 1.0) {
        const double fv = h(tv);
        if (fv < best) {
          best = fv;
          t = tv;
        }
      }
    }
  }
  return {std::max(0.0, -best), t};
}

// Exponents of alpha1, alpha2, beta1, beta2, Pe1 = pi1 alpha1 + pi2 beta1 and
// Pe2 = pi1 alpha2 + pi2 beta2 (independent of the priors).
struct ExactExponents {
  double alpha1;
  double alpha2;
  double beta1;
  double beta2;
  double pe1;
  double pe2;
};

inline ExactExponents exact_exponents(const HypothesisPair& pair, const Thresholds& th) {
  require_admissible(pair, th);
  const double r1 = -th.lambda_upper;
  const double r2 = -th.lambda_lower;
  const double i1 = rate_function(pair, r1).value;
  const double i2 = th.lambda_upper == th.lambda_lower ? i1 : rate_function(pair, r2).value;
  ExactExponents e{};
  e.alpha1 = i1;
  e.alpha2 = i2;
  e.beta1 = std::max(0.0, i2 - r2);
  e.beta2 = std::max(0.0, i1 - r1);
  e.pe1 = std::min(e.alpha1, e.beta1);
  e.pe2 = std::min(e.alpha2, e.beta2);
  return e;
}

// Per-(i, j) table: i = 1 bounds the H1 event (alpha^(j)), i = 2 the H2 event
// (beta^(j)); j = 1 is error-or-erasure, j = 2 is error.
struct ComponentTable {
  std::array<std::array<double, 2>, 2> value{};
  std::array<double, 2> minimum{};

  double at(int i, int j) const { return value[i - 1][j - 1]; }
  double min_for(int j) const { return minimum[j - 1]; }
};

struct BoundInputs {
  std::array<std::array<double, 2>, 2> epsilon{};
  std::array<std::array<double, 2>, 2> delta{};
  std::array<double, 2> d{};
  std::array<double, 2> sigma_sq{};
  std::array<double, 2> gamma{};
};

inline BoundInputs bound_inputs(const HypothesisPair& pair, const Thresholds& th) {
  const LlrStats s1 = llr_stats(pair, 1);
  const LlrStats s2 = llr_stats(pair, 2);
  require_admissible(pair, th);
  const double d12 = kl_divergence(pair.p1, pair.p2);
  const double d21 = kl_divergence(pair.p2, pair.p1);

  BoundInputs in;
  in.d = {s1.d, s2.d};
  in.sigma_sq = {s1.sigma_sq, s2.sigma_sq};
  in.gamma = {s1.gamma, s2.gamma};
  in.epsilon[0][0] = d12 - th.lambda_upper;
  in.epsilon[1][0] = d21 + th.lambda_lower;
  in.epsilon[0][1] = d12 - th.lambda_lower;
  in.epsilon[1][1] = d21 + th.lambda_upper;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) in.delta[i][j] = in.epsilon[i][j] / in.d[i];
  }
  return in;
}

namespace detail {

template <typename F>
ComponentTable tabulate(const BoundInputs& in, F&& component) {
  ComponentTable t;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) t.value[i][j] = component(in.delta[i][j], in.gamma[i]);
  }
  for (int j = 0; j < 2; ++j) t.minimum[j] = std::min(t.value[0][j], t.value[1][j]);
  return t;
}

}  // namespace detail

struct LowerBounds {
  BoundInputs inputs;
  ComponentTable exponents;
};

// Exponent lower bounds from the variance-aware martingale inequality. A
// component with delta > 1 is +inf: that event has probability zero.
inline LowerBounds refined_lower_bounds(const HypothesisPair& pair, const Thresholds& th) {
  LowerBounds lb{bound_inputs(pair, th), {}};
  lb.exponents = detail::tabulate(lb.inputs, [](double delta, double gamma) { return refined_exponent(delta, gamma); });
  return lb;
}

// Looser bounds delta^2 / 2 obtained from Azuma's inequality.
inline LowerBounds azuma_lower_bounds(const HypothesisPair& pair, const Thresholds& th) {
  LowerBounds lb{bound_inputs(pair, th), {}};
  lb.exponents = detail::tabulate(lb.inputs, [](double delta, double) { return 0.5 * delta * delta; });
  return lb;
}

// Zero-threshold lower bounds on the error exponent (E_L and its Azuma version).
inline double refined_error_exponent_lb(const HypothesisPair& pair) {
  return refined_lower_bounds(pair, Thresholds{}).exponents.min_for(2);
}

inline double azuma_error_exponent_lb(const HypothesisPair& pair) {
  return azuma_lower_bounds(pair, Thresholds{}).exponents.min_for(2);
}

struct ExponentReport {
  Thresholds thresholds;
  ExactExponents exact;
  BoundInputs inputs;
  ComponentTable refined;
  ComponentTable azuma;
  // refined / azuma per component; inverse_gamma is the second-order
  // improvement factor 1/gamma_i.
  std::array<std::array<double, 2>, 2> improvement{};
  std::array<double, 2> inverse_gamma{};
  // Variant in which the H2 increment variance is weighted by P1 rather than P2.
  double cross_weighted_gamma2 = 0.0;
  std::array<double, 2> cross_weighted_refined_min{};
};

inline constexpr double kOrderingSlack = 1e-12;

inline ExponentReport compare_report(const HypothesisPair& pair, const Thresholds& th) {
  ExponentReport rep;
  rep.thresholds = th;
  const LowerBounds refined = refined_lower_bounds(pair, th);
  rep.inputs = refined.inputs;
  rep.refined = refined.exponents;
  rep.azuma = azuma_lower_bounds(pair, th).exponents;
  rep.exact = exact_exponents(pair, th);

  for (int i = 0; i < 2; ++i) {
    rep.inverse_gamma[i] = 1.0 / rep.inputs.gamma[i];
    for (int j = 0; j < 2; ++j) {
      const double a = rep.azuma.value[i][j];
      rep.improvement[i][j] = a > 0.0 ? rep.refined.value[i][j] / a : kInfinity;
    }
  }

  rep.cross_weighted_gamma2 = cross_weighted_gamma(pair, 2);
  for (int j = 0; j < 2; ++j) {
    rep.cross_weighted_refined_min[j] =
        std::min(refined_exponent(rep.inputs.delta[0][j], rep.inputs.gamma[0]),
                 refined_exponent(rep.inputs.delta[1][j], rep.cross_weighted_gamma2));
  }

  const double exact_min[2] = {rep.exact.pe1, rep.exact.pe2};
  for (int j = 0; j < 2; ++j) {
    if (rep.azuma.minimum[j] > rep.refined.minimum[j] + kOrderingSlack ||
        rep.refined.minimum[j] > exact_min[j] + kOrderingSlack) {
      throw Error(ErrorKind::NoConvergence, "exponent ordering azuma <= refined <= exact violated");
    }
  }
  return rep;
}

}  // namespace devex
