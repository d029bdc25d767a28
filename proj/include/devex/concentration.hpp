#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "devex/error.hpp"
#include "devex/probdist.hpp"

// Tail bounds for martingales with bounded jumps: Azuma's inequality and its
// refinement that also uses a conditional-variance bound.

namespace devex {

enum class Sidedness { OneSided, TwoSided };

// Uniform jump bound d and conditional-variance bound sigma_sq of a martingale.
class MartingaleParams {
 public:
  MartingaleParams(double d, double sigma_sq) : d_(d), sigma_sq_(sigma_sq) {
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorKind::DomainError, "jump bound d must be positive");
    if (!(sigma_sq > 0.0)) throw Error(ErrorKind::DomainError, "variance bound must be positive");
    if (sigma_sq > d * d) {
      throw Error(ErrorKind::DomainError, "conditional variance cannot exceed the squared jump bound");
    }
  }

  double d() const noexcept { return d_; }
  double sigma_sq() const noexcept { return sigma_sq_; }
  double gamma() const noexcept { return sigma_sq_ / (d_ * d_); }
  double delta(double alpha) const noexcept { return alpha / d_; }

 private:
  double d_;
  double sigma_sq_;
};

// Azuma: P(|X_n - X_0| >= r) <= 2 exp(-r^2 / (2 sum d_k^2)). Not clamped to 1.
inline double azuma_bound(std::span<const double> jump_bounds, double r) {
  if (!(r >= 0.0)) throw Error(ErrorKind::DomainError, "deviation must be nonnegative");
  double ss = 0.0;
  for (double d : jump_bounds) {
    if (!(d >= 0.0)) throw Error(ErrorKind::DomainError, "jump bounds must be nonnegative");
    ss += d * d;
  }
  if (r == 0.0) return 2.0;
  if (ss == 0.0) return 0.0;
  return 2.0 * std::exp(-r * r / (2.0 * ss));
}

// D((delta+gamma)/(1+gamma) || gamma/(1+gamma)) for delta in [0,1], gamma > 0,
// through the expansion
//   gamma/(1+gamma) [ (1+u) ln(1+u) + (1-delta) ln(1-delta) / gamma ],  u = delta/gamma,
// which stays accurate as delta -> 0. Infinite for delta > 1.
inline double refined_exponent(double delta, double gamma) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::DomainError, "delta must be nonnegative");
  if (!(gamma > 0.0)) throw Error(ErrorKind::DomainError, "gamma must be positive");
  if (delta > 1.0) return std::numeric_limits<double>::infinity();
  const double u = delta / gamma;
  const double a = (1.0 + u) * std::log1p(u);
  const double b = delta < 1.0 ? (1.0 - delta) * std::log1p(-delta) : 0.0;
  return std::max(0.0, gamma / (1.0 + gamma) * (a + b / gamma));
}

// Refined bound on P(X_n - X_0 >= alpha n) (one-sided) or on the two-sided
// event, for a martingale with jumps bounded by d and conditional variance at
// most sigma_sq. Exactly zero once alpha exceeds d.
inline double refined_bound(const MartingaleParams& params, std::uint64_t n, double alpha,
                            Sidedness sided = Sidedness::OneSided) {
  if (n == 0) throw Error(ErrorKind::DomainError, "n must be positive");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::DomainError, "alpha must be nonnegative");
  const double c = sided == Sidedness::TwoSided ? 2.0 : 1.0;
  const double delta = params.delta(alpha);
  if (delta > 1.0) return 0.0;
  return c * std::exp(-static_cast<double>(n) * refined_exponent(delta, params.gamma()));
}

struct ScalingRow {
  std::uint64_t n;
  double bound;
  double asymptote;
  double ratio;
};

// Refined two-sided bound at deviation alpha*sqrt(n) next to its n -> infinity
// limit 2 exp(-delta^2 / (2 gamma)).
inline std::vector<ScalingRow> sqrt_scaling_report(const MartingaleParams& params, double alpha,
                                                   std::span<const std::uint64_t> n_grid) {
  if (n_grid.empty()) throw Error(ErrorKind::DomainError, "n grid is empty");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::DomainError, "alpha must be nonnegative");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw Error(ErrorKind::DomainError, "n grid must be positive and increasing");
    }
  }
  const double delta = params.delta(alpha);
  const double asymptote = 2.0 * std::exp(-delta * delta / (2.0 * params.gamma()));
  std::vector<ScalingRow> rows;
  rows.reserve(n_grid.size());
  for (std::uint64_t n : n_grid) {
    const double per_step = alpha / std::sqrt(static_cast<double>(n));
    const double b = refined_bound(params, n, per_step, Sidedness::TwoSided);
    rows.push_back({n, b, asymptote, b / asymptote});
  }
  return rows;
}

// (1+u) ln(1+u), zero at u = -1.
inline double xlogx_exact(double u) {
  if (!(u >= -1.0)) throw Error(ErrorKind::DomainError, "u must be >= -1");
  if (u == -1.0) return 0.0;
  return (1.0 + u) * std::log1p(u);
}

// Polynomial minorant of (1+u) ln(1+u): u + u^2/2 on [-1,0], u + u^2/2 - u^3/6 for u >= 0.
inline double xlogx_floor(double u) {
  if (!(u >= -1.0)) throw Error(ErrorKind::DomainError, "u must be >= -1");
  const double q = u + 0.5 * u * u;
  return u <= 0.0 ? q : q - u * u * u / 6.0;
}

// delta^2/(2 gamma) - delta^3/(6 gamma^2 (1+gamma)); never above refined_exponent.
inline double quad_cubic_floor(double delta, double gamma) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error(ErrorKind::DomainError, "delta outside [0,1]");
  if (!(gamma > 0.0)) throw Error(ErrorKind::DomainError, "gamma must be positive");
  return delta * delta / (2.0 * gamma) - delta * delta * delta / (6.0 * gamma * gamma * (1.0 + gamma));
}

}  // namespace devex
