#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace gstorage {

/// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Psi(x) = P(N(0,1) > x). Underflows to 0 past x ~ 38.4; use
/// log_normal_survival beyond that.
inline double normal_survival(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double normal_cdf(double x) { return normal_survival(-x); }

namespace detail {

// Mills ratio Psi(x)/phi(x) by backward evaluation of the Laplace continued
// fraction; converges quickly for x >= 30.
inline double mills_ratio_cf(double x) {
  double tail = x;
  for (int k = 80; k >= 1; --k) tail = x + k / tail;
  return 1.0 / tail;
}

}  // namespace detail

/// log Psi(x), finite for every finite x.
inline double log_normal_survival(double x) {
  if (x < 0.0) return std::log1p(-normal_survival(-x));
  if (x < 30.0) return std::log(normal_survival(x));
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(detail::mills_ratio_cf(x));
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace gstorage
