#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "devex/error.hpp"

// Finite-alphabet probability mass functions and the information measures
// built on them. All logarithms are natural; every divergence is in nats.

namespace devex {

inline constexpr double kNormalizationTolerance = 1e-9;

// Strictly positive pmf on a labelled finite alphabet. Immutable; build
// through make_pmf.
class Pmf {
 public:
  std::size_t size() const noexcept { return probs_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<double>& log_probs() const noexcept { return log_probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

  bool same_alphabet(const Pmf& other) const { return labels_ == other.labels_; }

  friend Pmf make_pmf(std::vector<std::string> labels, std::vector<double> probs);

 private:
  Pmf(std::vector<std::string> labels, std::vector<double> probs)
      : labels_(std::move(labels)), probs_(std::move(probs)) {
    log_probs_.reserve(probs_.size());
    for (double p : probs_) log_probs_.push_back(std::log(p));
  }

  std::vector<std::string> labels_;
  std::vector<double> probs_;
  std::vector<double> log_probs_;
};

// Validates and (for sums within 1e-9 of one) renormalizes.
inline Pmf make_pmf(std::vector<std::string> labels, std::vector<double> probs) {
  if (labels.size() != probs.size()) {
    throw Error(ErrorKind::DomainError, "labels and probabilities differ in length");
  }
  if (probs.size() < 2) {
    throw Error(ErrorKind::DomainError, "a pmf needs at least two symbols");
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw Error(ErrorKind::DuplicateLabel, "label '" + l + "' repeated");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0)) {
      throw Error(ErrorKind::NonPositiveProbability,
                  "probability of '" + labels[i] + "' is not strictly positive");
    }
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (!std::isfinite(sum) || std::abs(sum - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorKind::NotNormalized, "probabilities sum to " + std::to_string(sum));
  }
  for (double& p : probs) p /= sum;
  return Pmf(std::move(labels), std::move(probs));
}

// Two hypotheses over one alphabet (identical labels, identical order).
struct HypothesisPair {
  Pmf p1;
  Pmf p2;
};

inline HypothesisPair make_hypothesis_pair(Pmf p1, Pmf p2) {
  if (!p1.same_alphabet(p2)) {
    throw Error(ErrorKind::AlphabetMismatch, "hypotheses use different alphabets");
  }
  return HypothesisPair{std::move(p1), std::move(p2)};
}

inline HypothesisPair swapped(const HypothesisPair& pair) { return {pair.p2, pair.p1}; }

namespace detail {

inline void require_same_alphabet(const Pmf& p, const Pmf& q) {
  if (!p.same_alphabet(q)) throw Error(ErrorKind::AlphabetMismatch, "pmfs use different alphabets");
}

// ln sum_i exp(v_i), shifted by the maximum.
inline double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace detail

// D(p||q) = sum_x p(x) ln(p(x)/q(x)).
inline double kl_divergence(const Pmf& p, const Pmf& q) {
  detail::require_same_alphabet(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += p[i] * (p.log_probs()[i] - q.log_probs()[i]);
  return std::max(d, 0.0);
}

// Divergence between Bernoulli(p) and Bernoulli(q), with 0 ln 0 = 0.
inline double binary_kl(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::DomainError, "binary_kl: p outside [0,1]");
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::DomainError, "binary_kl: q outside (0,1)");
  double d = 0.0;
  if (p > 0.0) d += p * std::log(p / q);
  if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return std::max(d, 0.0);
}

// Renyi divergence of order t, D_t(p||q) = ln(sum_x p(x)^t q(x)^(1-t)) / (t-1),
// so that H(t) = (t-1) D_t(P2||P1).
inline double renyi_divergence(const Pmf& p, const Pmf& q, double t) {
  detail::require_same_alphabet(p, q);
  if (t == 1.0) throw Error(ErrorKind::DomainError, "renyi_divergence: order 1 is excluded");
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    terms[i] = t * p.log_probs()[i] + (1.0 - t) * q.log_probs()[i];
  }
  return detail::log_sum_exp(terms) / (t - 1.0);
}

// H(t) = ln sum_x P1(x)^(1-t) P2(x)^t.
inline double log_mgf(const HypothesisPair& pair, double t) {
  if (t == 0.0 || t == 1.0) return 0.0;
  const auto& l1 = pair.p1.log_probs();
  const auto& l2 = pair.p2.log_probs();
  std::vector<double> terms(l1.size());
  for (std::size_t i = 0; i < l1.size(); ++i) terms[i] = (1.0 - t) * l1[i] + t * l2[i];
  return detail::log_sum_exp(terms);
}

// H'(t): mean of ln(P2/P1) under the tilted pmf proportional to P1^(1-t) P2^t.
// Nondecreasing in t.
inline double log_mgf_derivative(const HypothesisPair& pair, double t) {
  const auto& l1 = pair.p1.log_probs();
  const auto& l2 = pair.p2.log_probs();
  const std::size_t k = l1.size();
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < k; ++i) terms[i] = (1.0 - t) * l1[i] + t * l2[i];
  const double m = *std::max_element(terms.begin(), terms.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = std::exp(terms[i] - m);
    num += w * (l2[i] - l1[i]);
    den += w;
  }
  return num / den;
}

// One row of the martingale-difference table: a symbol's probability under the
// generating hypothesis and the increment it produces.
struct Increment {
  double weight;
  double value;
};

// Jump bound, conditional variance and their ratio for the Doob martingale of
// the log-likelihood ratio under one hypothesis.
struct LlrStats {
  int hypothesis_index;
  double d;
  double sigma_sq;
  double gamma;
  std::vector<Increment> increments;
};

// Under H1 the increments are ln(P1/P2) - D(P1||P2) weighted by P1; under H2
// they are ln(P2/P1) - D(P2||P1) weighted by P2.
inline LlrStats llr_stats(const HypothesisPair& pair, int hypothesis_index) {
  if (hypothesis_index != 1 && hypothesis_index != 2) {
    throw Error(ErrorKind::DomainError, "hypothesis index must be 1 or 2");
  }
  const Pmf& gen = hypothesis_index == 1 ? pair.p1 : pair.p2;
  const Pmf& alt = hypothesis_index == 1 ? pair.p2 : pair.p1;
  detail::require_same_alphabet(gen, alt);

  LlrStats s{hypothesis_index, 0.0, 0.0, 0.0, {}};
  const double div = kl_divergence(gen, alt);
  s.increments.reserve(gen.size());
  for (std::size_t i = 0; i < gen.size(); ++i) {
    const double v = (gen.log_probs()[i] - alt.log_probs()[i]) - div;
    s.increments.push_back({gen[i], v});
    s.d = std::max(s.d, std::abs(v));
    s.sigma_sq += gen[i] * v * v;
  }
  if (!(s.d > 0.0)) {
    throw Error(ErrorKind::DegenerateIncrements, "identical hypotheses have no martingale jumps");
  }
  s.sigma_sq = std::min(s.sigma_sq, s.d * s.d);
  s.gamma = s.sigma_sq / (s.d * s.d);
  return s;
}

// Variance ratio of the hypothesis-`index` increments when they are weighted
// by the other hypothesis' pmf instead of the generating one. Diagnostic only.
inline double cross_weighted_gamma(const HypothesisPair& pair, int hypothesis_index) {
  const LlrStats s = llr_stats(pair, hypothesis_index);
  const Pmf& other = hypothesis_index == 1 ? pair.p2 : pair.p1;
  double var = 0.0;
  for (std::size_t i = 0; i < other.size(); ++i) {
    var += other[i] * s.increments[i].value * s.increments[i].value;
  }
  return var / (s.d * s.d);
}

}  // namespace devex
