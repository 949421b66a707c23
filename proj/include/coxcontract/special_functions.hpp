#pragma once

// Regularized incomplete gamma function and the distribution tails built on
// it (Gamma upper tail, chi-square survival, Gamma quantile).

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coxcontract {

namespace detail {

// Series expansion for P(a,x), valid for x < a+1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction (modified Lentz) for Q(a,x), valid for x >= a+1.
inline double gamma_q_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be positive");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_cf(a, x);
}

/// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_q: a must be positive");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_q: x must be non-negative");
  if (x == 0.0) return 1.0;
  return (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
}

/// P(X > t) for X ~ Gamma(shape, rate).
inline double gamma_upper_tail(double shape, double rate, double t) {
  if (t <= 0.0) return 1.0;
  return regularized_gamma_q(shape, rate * t);
}

/// P(X <= t) for X ~ Gamma(shape, rate).
inline double gamma_cdf(double shape, double rate, double t) {
  if (t <= 0.0) return 0.0;
  return regularized_gamma_p(shape, rate * t);
}

/// Survival function of chi-square with k degrees of freedom.
inline double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

/// Quantile of Gamma(shape, rate) by bisection on the regularized CDF.
inline double gamma_quantile(double shape, double rate, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gamma_quantile: p must be in (0,1)");
  double lo = 0.0;
  double hi = shape / rate;
  while (gamma_cdf(shape, rate, hi) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_cdf(shape, rate, mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace coxcontract
