#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "devex/error.hpp"
#include "devex/exponents.hpp"
#include "devex/probdist.hpp"

// Monte Carlo validation of the likelihood-ratio test, the exact binomial tail
// oracle for binary alphabets, and Doob martingale traces of the LLR.

namespace devex {

struct SimConfig {
  std::uint64_t n = 1;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  Thresholds thresholds{};
  double pi1 = 0.5;
  double pi2 = 0.5;
};

inline void validate(const SimConfig& cfg) {
  if (cfg.n == 0) throw Error(ErrorKind::DomainError, "n must be positive");
  if (cfg.trials == 0) throw Error(ErrorKind::DomainError, "trials must be positive");
  if (!(cfg.pi1 > 0.0 && cfg.pi1 < 1.0 && cfg.pi2 > 0.0 && cfg.pi2 < 1.0) ||
      std::abs(cfg.pi1 + cfg.pi2 - 1.0) > 1e-12) {
    throw Error(ErrorKind::DomainError, "priors must lie in (0,1) and sum to 1");
  }
}

struct Interval {
  double lower;
  double upper;

  bool contains(double x) const { return x >= lower && x <= upper; }
};

inline constexpr double kZ95 = 1.959963984540054;

// 95% Wilson score interval; a zero count gets [0, 3/trials] instead.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw Error(ErrorKind::DomainError, "no trials");
  const double n = static_cast<double>(trials);
  if (successes == 0) return {0.0, std::min(1.0, 3.0 / n)};
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct Estimate {
  double value;
  Interval ci;
  double empirical_exponent;  // -ln(value)/n, +inf for a zero estimate
};

struct SimResult {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  // Event counts; under H1 for alpha, under H2 for beta.
  std::uint64_t alpha1_count = 0;
  std::uint64_t alpha2_count = 0;
  std::uint64_t beta1_count = 0;
  std::uint64_t beta2_count = 0;
  Estimate alpha1{}, alpha2{}, beta1{}, beta2{}, pe1{}, pe2{};
};

namespace detail {

// Natural-log likelihood ratio ln(P1/P2) per symbol.
inline std::vector<double> llr_table(const HypothesisPair& pair) {
  std::vector<double> t(pair.p1.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = pair.p1.log_probs()[i] - pair.p2.log_probs()[i];
  return t;
}

// L from symbol counts, summed in symbol order. Shared by the simulator and
// the exact oracle so both classify identical outcomes identically.
inline double llr_from_counts(std::span<const std::uint64_t> counts, std::span<const double> llr) {
  double l = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) l += static_cast<double>(counts[i]) * llr[i];
  return l;
}

// Decision events. Values within the tie band of n*lambda count as equal.
struct EventFlags {
  bool le_upper;  // L <= n lambda_upper
  bool le_lower;  // L <= n lambda_lower
  bool ge_lower;  // L >= n lambda_lower
  bool ge_upper;  // L >= n lambda_upper
};

inline double tie_band(std::uint64_t n, std::span<const double> llr) {
  double m = 0.0;
  for (double v : llr) m = std::max(m, std::abs(v));
  return 1e-12 * (1.0 + static_cast<double>(n) * m);
}

inline EventFlags classify(double l, std::uint64_t n, const Thresholds& th, double band) {
  const double up = static_cast<double>(n) * th.lambda_upper;
  const double lo = static_cast<double>(n) * th.lambda_lower;
  return {l <= up + band, l <= lo + band, l >= lo - band, l >= up - band};
}

inline std::vector<double> cdf_of(const Pmf& p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    c[i] = acc;
  }
  c.back() = 1.0;
  return c;
}

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t draw(std::mt19937_64& rng, std::span<const double> cdf) {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// Stream for one work unit, derived only from (seed, stream tag, index).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Runs body(begin, end, worker) over [0, count) split into contiguous chunks.
template <typename Body>
void parallel_chunks(std::uint64_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    body(std::uint64_t{0}, count, 0u);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t b = w * chunk;
    const std::uint64_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e, w] { body(b, e, w); });
  }
  for (auto& t : pool) t.join();
}

inline Estimate make_estimate(std::uint64_t count, std::uint64_t trials, std::uint64_t n) {
  const double v = static_cast<double>(count) / static_cast<double>(trials);
  const double e = v > 0.0 ? -std::log(v) / static_cast<double>(n) : kInfinity;
  return {v, wilson_interval(count, trials), e};
}

inline Estimate mix(const Estimate& a, const Estimate& b, double pi1, double pi2, std::uint64_t n) {
  const double v = pi1 * a.value + pi2 * b.value;
  const double e = v > 0.0 ? -std::log(v) / static_cast<double>(n) : kInfinity;
  return {v, {pi1 * a.ci.lower + pi2 * b.ci.lower, pi1 * a.ci.upper + pi2 * b.ci.upper}, e};
}

}  // namespace detail

inline constexpr std::uint64_t kStreamH1 = 1;
inline constexpr std::uint64_t kStreamH2 = 2;
inline constexpr std::uint64_t kStreamTrace = 3;
inline constexpr std::uint64_t kStreamSll = 4;

// Draws `trials` length-n samples under each hypothesis and counts the
// alpha/beta events. Results depend only on (pair, cfg), not on `workers`.
inline SimResult simulate_test(const HypothesisPair& pair, const SimConfig& cfg, unsigned workers = 1) {
  validate(cfg);
  require_admissible(pair, cfg.thresholds);
  const std::vector<double> llr = detail::llr_table(pair);
  const double band = detail::tie_band(cfg.n, llr);
  const std::size_t k = llr.size();

  struct Counts {
    std::uint64_t a1 = 0, a2 = 0, b1 = 0, b2 = 0;
  };

  auto run = [&](const Pmf& gen, std::uint64_t tag) {
    const std::vector<double> cdf = detail::cdf_of(gen);
    std::vector<Counts> partial(std::max(1u, workers));
    detail::parallel_chunks(cfg.trials, workers, [&](std::uint64_t b, std::uint64_t e, unsigned w) {
      std::vector<std::uint64_t> counts(k);
      Counts c;
      for (std::uint64_t t = b; t < e; ++t) {
        std::mt19937_64 rng = detail::stream_rng(cfg.seed, tag, t);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::uint64_t s = 0; s < cfg.n; ++s) ++counts[detail::draw(rng, cdf)];
        const auto f = detail::classify(detail::llr_from_counts(counts, llr), cfg.n, cfg.thresholds, band);
        c.a1 += f.le_upper;
        c.a2 += f.le_lower;
        c.b1 += f.ge_lower;
        c.b2 += f.ge_upper;
      }
      partial[w] = c;
    });
    Counts total;
    for (const auto& c : partial) {
      total.a1 += c.a1;
      total.a2 += c.a2;
      total.b1 += c.b1;
      total.b2 += c.b2;
    }
    return total;
  };

  const Counts h1 = run(pair.p1, kStreamH1);
  const Counts h2 = run(pair.p2, kStreamH2);

  SimResult r;
  r.n = cfg.n;
  r.trials = cfg.trials;
  r.alpha1_count = h1.a1;
  r.alpha2_count = h1.a2;
  r.beta1_count = h2.b1;
  r.beta2_count = h2.b2;
  r.alpha1 = detail::make_estimate(h1.a1, cfg.trials, cfg.n);
  r.alpha2 = detail::make_estimate(h1.a2, cfg.trials, cfg.n);
  r.beta1 = detail::make_estimate(h2.b1, cfg.trials, cfg.n);
  r.beta2 = detail::make_estimate(h2.b2, cfg.trials, cfg.n);
  r.pe1 = detail::mix(r.alpha1, r.beta1, cfg.pi1, cfg.pi2, cfg.n);
  r.pe2 = detail::mix(r.alpha2, r.beta2, cfg.pi1, cfg.pi2, cfg.n);
  return r;
}

struct ExactTail {
  double alpha1;
  double alpha2;
  double beta1;
  double beta2;

  double pe1(double pi1) const { return pi1 * alpha1 + (1.0 - pi1) * beta1; }
  double pe2(double pi1) const { return pi1 * alpha2 + (1.0 - pi1) * beta2; }
};

// Exact alpha/beta for a binary alphabet: L depends only on the count of the
// second symbol, so each tail is a binomial sum (accumulated in log domain).
inline ExactTail exact_binary_tail(const HypothesisPair& pair, std::uint64_t n, const Thresholds& th) {
  if (pair.p1.size() != 2) throw Error(ErrorKind::NotBinary, "exact tail needs a two-symbol alphabet");
  if (n == 0) throw Error(ErrorKind::DomainError, "n must be positive");
  require_admissible(pair, th);
  const std::vector<double> llr = detail::llr_table(pair);
  const double band = detail::tie_band(n, llr);
  const double nd = static_cast<double>(n);

  std::vector<double> a1, a2, b1, b2;
  for (std::uint64_t k = 0; k <= n; ++k) {
    const std::uint64_t counts[2] = {n - k, k};
    const auto f = detail::classify(detail::llr_from_counts(counts, llr), n, th, band);
    const double kd = static_cast<double>(k);
    const double log_binom = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
    const double under1 = log_binom + kd * pair.p1.log_probs()[1] + (nd - kd) * pair.p1.log_probs()[0];
    const double under2 = log_binom + kd * pair.p2.log_probs()[1] + (nd - kd) * pair.p2.log_probs()[0];
    if (f.le_upper) a1.push_back(under1);
    if (f.le_lower) a2.push_back(under1);
    if (f.ge_lower) b1.push_back(under2);
    if (f.ge_upper) b2.push_back(under2);
  }
  auto total = [](const std::vector<double>& logs) {
    return logs.empty() ? 0.0 : std::min(1.0, std::exp(detail::log_sum_exp(logs)));
  };
  return {total(a1), total(a2), total(b1), total(b2)};
}

struct ExponentFit {
  double slope;
  double intercept;
};

struct ProbabilityPoint {
  std::uint64_t n;
  double p;
};

// Least-squares fit of -ln p against n.
inline ExponentFit empirical_exponent(std::span<const ProbabilityPoint> points) {
  if (points.size() < 3) throw Error(ErrorKind::DomainError, "need at least three points");
  double sx = 0.0, sy = 0.0;
  for (const auto& pt : points) {
    if (!(pt.p > 0.0 && pt.p < 1.0)) {
      throw Error(ErrorKind::DomainError, "probability estimates must lie in (0,1); increase trials or reduce n");
    }
    sx += static_cast<double>(pt.n);
    sy += -std::log(pt.p);
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& pt : points) {
    const double dx = static_cast<double>(pt.n) - mx;
    sxx += dx * dx;
    sxy += dx * (-std::log(pt.p) - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::DomainError, "block lengths must not all coincide");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

// U_0..U_n of the Doob martingale E[L | X_1..X_k] under the chosen hypothesis.
struct MartingaleTrace {
  int hypothesis_index = 1;
  std::vector<double> values;          // U_0 .. U_n
  std::vector<double> increments;      // U_k - U_{k-1} as drawn from the increment table
  std::vector<std::size_t> symbols;    // X_1 .. X_n
};

// Under H1: U_k = sum_{i<=k} ln(P1/P2)(X_i) + (n-k) D(P1||P2).
// Under H2: U_k = sum_{i<=k} ln(P1/P2)(X_i) - (n-k) D(P2||P1).
inline MartingaleTrace martingale_trace(const HypothesisPair& pair, int hypothesis_index, std::uint64_t n,
                                        std::uint64_t seed) {
  if (hypothesis_index != 1 && hypothesis_index != 2) {
    throw Error(ErrorKind::DomainError, "hypothesis index must be 1 or 2");
  }
  if (n == 0) throw Error(ErrorKind::DomainError, "a trace needs n >= 1");
  const std::vector<double> llr = detail::llr_table(pair);
  const Pmf& gen = hypothesis_index == 1 ? pair.p1 : pair.p2;
  const double drift = hypothesis_index == 1 ? kl_divergence(pair.p1, pair.p2) : -kl_divergence(pair.p2, pair.p1);
  const std::vector<double> cdf = detail::cdf_of(gen);
  std::mt19937_64 rng = detail::stream_rng(seed, kStreamTrace, static_cast<std::uint64_t>(hypothesis_index));

  MartingaleTrace tr;
  tr.hypothesis_index = hypothesis_index;
  tr.values.reserve(n + 1);
  tr.increments.reserve(n);
  tr.symbols.reserve(n);
  const double nd = static_cast<double>(n);
  tr.values.push_back(nd * drift);
  double partial = 0.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const std::size_t x = detail::draw(rng, cdf);
    tr.symbols.push_back(x);
    tr.increments.push_back(llr[x] - drift);
    partial += llr[x];
    tr.values.push_back(partial + (nd - static_cast<double>(k)) * drift);
  }
  return tr;
}

struct SllEstimate {
  double mean;
  double standard_error;
};

// Mean and standard error of L/n over independent trials.
inline SllEstimate sll_check(const HypothesisPair& pair, int hypothesis_index, std::uint64_t n,
                             std::uint64_t trials, std::uint64_t seed, unsigned workers = 1) {
  if (hypothesis_index != 1 && hypothesis_index != 2) {
    throw Error(ErrorKind::DomainError, "hypothesis index must be 1 or 2");
  }
  if (n == 0 || trials == 0) throw Error(ErrorKind::DomainError, "n and trials must be positive");
  const std::vector<double> llr = detail::llr_table(pair);
  const std::vector<double> cdf = detail::cdf_of(hypothesis_index == 1 ? pair.p1 : pair.p2);
  std::vector<double> normalized(trials);
  detail::parallel_chunks(trials, workers, [&](std::uint64_t b, std::uint64_t e, unsigned) {
    std::vector<std::uint64_t> counts(llr.size());
    for (std::uint64_t t = b; t < e; ++t) {
      std::mt19937_64 rng = detail::stream_rng(seed, kStreamSll + 16 * static_cast<std::uint64_t>(hypothesis_index), t);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::uint64_t s = 0; s < n; ++s) ++counts[detail::draw(rng, cdf)];
      normalized[t] = detail::llr_from_counts(counts, llr) / static_cast<double>(n);
    }
  });
  double sum = 0.0;
  for (double v : normalized) sum += v;
  const double mean = sum / static_cast<double>(trials);
  double ss = 0.0;
  for (double v : normalized) ss += (v - mean) * (v - mean);
  const double var = trials > 1 ? ss / static_cast<double>(trials - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(trials))};
}

}  // namespace devex
