#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "errors.hpp"

namespace gstorage {

/// Variance function sigma^2(t) of a centered Gaussian process with
/// stationary increments, together with its regular-variation indices
/// (2*alpha at infinity, 2*alpha0 at zero).
///
/// Families may supply an exact derivative and an exact inverse of
/// sigma(t) = sqrt(sigma^2(t)); otherwise numerical fallbacks are used.
class VarianceFunction {
 public:
  using Fn = std::function<double(double)>;

  VarianceFunction(Fn eval, double index_alpha, double index_alpha0, Fn derivative = {},
                   Fn inverse_sd = {}, std::string tag = "custom")
      : eval_(std::move(eval)),
        derivative_(std::move(derivative)),
        inverse_sd_(std::move(inverse_sd)),
        alpha_(index_alpha),
        alpha0_(index_alpha0),
        tag_(std::move(tag)) {
    if (!eval_) throw ConfigError("variance function must be callable");
    if (!(alpha_ > 0.0 && alpha_ < 1.0))
      throw ConfigError("regular-variation index alpha must lie in (0,1)");
    if (!(alpha0_ > 0.0 && alpha0_ <= 1.0))
      throw ConfigError("index alpha0 at zero must lie in (0,1]");
  }

  /// sigma^2(t); symmetric in t so that lags may be passed signed.
  double operator()(double t) const {
    t = std::abs(t);
    return t == 0.0 ? 0.0 : scale_ * eval_(t);
  }

  double sd(double t) const { return std::sqrt((*this)(t)); }

  /// d sigma^2 / dt for t > 0.
  double derivative(double t) const {
    if (derivative_) return scale_ * derivative_(t);
    const double h = 1e-6 * std::max(t, 1e-3);
    const double lo = std::max(t - h, 0.5 * t);
    return ((*this)(t + h) - (*this)(lo)) / (t + h - lo);
  }

  bool has_exact_inverse() const noexcept { return static_cast<bool>(inverse_sd_); }

  /// Exact inverse of sigma when the family provides one.
  std::optional<double> exact_inverse_sd(double y) const {
    if (!inverse_sd_) return std::nullopt;
    return inverse_sd_(y / std::sqrt(scale_));
  }

  double index_alpha() const noexcept { return alpha_; }
  double index_alpha0() const noexcept { return alpha0_; }
  double scale() const noexcept { return scale_; }
  const std::string& tag() const noexcept { return tag_; }

  /// Variance function of sqrt(factor) * X.
  VarianceFunction scaled(double factor) const {
    if (!(factor > 0.0)) throw ConfigError("variance scale factor must be positive");
    VarianceFunction copy = *this;
    copy.scale_ *= factor;
    return copy;
  }

 private:
  Fn eval_;
  Fn derivative_;
  Fn inverse_sd_;
  double alpha_;
  double alpha0_;
  double scale_ = 1.0;
  std::string tag_;
};

/// Standard fBm normalization Var B_H(t) = t^{2H}.
inline VarianceFunction fbm_variance(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ConfigError("Hurst parameter must lie in (0,1)");
  return VarianceFunction(
      [hurst](double t) { return std::pow(t, 2.0 * hurst); }, hurst, hurst,
      [hurst](double t) { return 2.0 * hurst * std::pow(t, 2.0 * hurst - 1.0); },
      [hurst](double y) { return std::pow(y, 1.0 / hurst); }, "fbm");
}

}  // namespace gstorage
