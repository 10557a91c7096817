#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace gstorage {

/// Correlation function R(t) = E zeta(0) zeta(t) of a stationary input rate
/// zeta. The integrated process Z(t) = int_0^t zeta has stationary
/// increments with variance 2 int_0^t (t - s) R(s) ds.
///
/// Closed forms, when present, are used for path synthesis; the quadrature
/// route below never consults them.
struct Correlation {
  std::string tag;
  std::function<double(double)> R;
  std::function<double(double)> closed_variance;  // optional
  std::function<double(double)> closed_integral;  // optional, int_0^t R
};

inline Correlation exp_correlation(double scale = 1.0) {
  if (!(scale > 0.0)) throw ConfigError("R_scale must be positive");
  Correlation c;
  c.tag = "exp";
  c.R = [scale](double t) { return std::exp(-std::abs(t) / scale); };
  c.closed_variance = [scale](double t) {
    const double x = t / scale;
    // 2 l^2 (x - 1 + e^{-x}); the expm1 form avoids cancellation near 0.
    return 2.0 * scale * scale * (x + std::expm1(-x));
  };
  c.closed_integral = [scale](double t) { return -scale * std::expm1(-t / scale); };
  return c;
}

inline Correlation gauss_correlation(double scale = 1.0) {
  if (!(scale > 0.0)) throw ConfigError("R_scale must be positive");
  Correlation c;
  c.tag = "gauss";
  c.R = [scale](double t) { return std::exp(-(t / scale) * (t / scale)); };
  c.closed_integral = [scale](double t) {
    return 0.5 * scale * std::sqrt(std::numbers::pi) * std::erf(t / scale);
  };
  c.closed_variance = [scale, integral = c.closed_integral](double t) {
    const double x = t / scale;
    return 2.0 * (t * integral(t) + 0.5 * scale * scale * std::expm1(-x * x));
  };
  return c;
}

/// Long-range correlation R(t) = (1 + t/l)^{2 alpha - 2}, alpha in (1/2, 1).
inline Correlation power_correlation(double alpha, double scale = 1.0) {
  if (!(alpha > 0.5 && alpha < 1.0)) throw ConfigError("R_alpha must lie in (1/2,1)");
  if (!(scale > 0.0)) throw ConfigError("R_scale must be positive");
  const double beta = 2.0 * alpha - 2.0;
  Correlation c;
  c.tag = "power";
  c.R = [=](double t) { return std::pow(1.0 + std::abs(t) / scale, beta); };
  c.closed_variance = [=](double t) {
    const double x = t / scale;
    const double num = std::pow(1.0 + x, beta + 2.0) - 1.0 - (beta + 2.0) * x;
    return 2.0 * scale * scale * num / ((beta + 1.0) * (beta + 2.0));
  };
  c.closed_integral = [=](double t) {
    return scale * (std::pow(1.0 + t / scale, beta + 1.0) - 1.0) / (beta + 1.0);
  };
  return c;
}

struct QuadratureOptions {
  double rel_tol = 1e-11;
  unsigned max_depth = 20;
  /// For short-range R: integrate only up to the cutoff where |R(T)|T^2 < 1e-12.
  bool truncate_at_cutoff = false;
};

namespace detail {

// Adaptive Gauss-Kronrod over [a, b] split at geometric breakpoints 1, 10,
// 100, ... so that long ranges and fast-decaying integrands both resolve.
template <class F>
double integrate_split(F&& f, double a, double b, const QuadratureOptions& opt,
                       const char* what) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  double lo = a;
  double brk = 1.0;
  while (lo < b) {
    while (brk <= lo) brk *= 10.0;
    const double hi = std::min(brk, b);
    double err = 0.0;
    double l1 = 0.0;
    const double piece =
        gauss_kronrod<double, 31>::integrate(f, lo, hi, opt.max_depth, opt.rel_tol, &err, &l1);
    const double scale = std::max(l1, 1e-300);
    if (!std::isfinite(piece) || err > std::max(1e3 * opt.rel_tol * scale, 1e-14))
      throw QuadratureError(what, err);
    total += piece;
    lo = hi;
  }
  return total;
}

}  // namespace detail

/// Smallest T (doubling search from 1) with |R(s)| s^2 < 1e-12 at s = T, 1.5T, 2T.
inline double srd_cutoff(const Correlation& corr) {
  auto small = [&](double s) { return std::abs(corr.R(s)) * s * s < 1e-12; };
  double T = 1.0;
  for (int i = 0; i < 60; ++i, T *= 2.0)
    if (small(T) && small(1.5 * T) && small(2.0 * T)) return T;
  throw NumericalError("correlation '" + corr.tag + "' does not decay fast enough for a cutoff");
}

/// sigma_Z^2(t) = 2 int_0^t (t - s) R(s) ds by adaptive quadrature.
inline double integrated_variance(const Correlation& corr, double t,
                                  const QuadratureOptions& opt = {}) {
  if (t < 0.0) throw ConfigError("integrated_variance needs t >= 0");
  if (t == 0.0) return 0.0;
  double upper = t;
  if (opt.truncate_at_cutoff) upper = std::min(t, srd_cutoff(corr));
  const double mass = detail::integrate_split(corr.R, 0.0, upper, opt, "int R");
  const double moment = detail::integrate_split([&](double s) { return s * corr.R(s); }, 0.0,
                                                upper, opt, "int sR");
  return 2.0 * (t * mass - moment);
}

struct SrdConstants {
  double G;       // 1 / int_0^inf R
  double D;       // int_0^inf t R(t) dt
  double cutoff;  // integration cutoff actually used
};

/// Checks the short-range conditions numerically: t R(t) -> 0, int_0^t R > 0
/// on a grid up to the cutoff, int t^2 |R| finite.
inline SrdConstants srd_constants(const Correlation& corr, const QuadratureOptions& opt = {}) {
  const double cut = srd_cutoff(corr);
  if (std::abs(cut * corr.R(cut)) > 1e-6)
    throw ConfigError("correlation '" + corr.tag + "' violates t R(t) -> 0");
  double running = 0.0;
  double lo = 0.0;
  const int pieces = 64;
  for (int i = 1; i <= pieces; ++i) {
    const double hi = cut * i / pieces;
    running += detail::integrate_split(corr.R, lo, hi, opt, "int R");
    if (!(running > 0.0))
      throw ConfigError("correlation '" + corr.tag + "' violates int_0^t R > 0 at t = " +
                        std::to_string(hi));
    lo = hi;
  }
  const double second = detail::integrate_split(
      [&](double s) { return s * s * std::abs(corr.R(s)); }, 0.0, cut, opt, "int t^2|R|");
  if (!std::isfinite(second)) throw ConfigError("int t^2 |R| is not finite");
  const double moment =
      detail::integrate_split([&](double s) { return s * corr.R(s); }, 0.0, cut, opt, "int tR");
  return {1.0 / running, moment, cut};
}

}  // namespace gstorage
