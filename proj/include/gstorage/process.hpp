#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "correlation.hpp"
#include "errors.hpp"
#include "variance.hpp"

namespace gstorage {

enum class FamilyKind { fbm, integrated_srd, integrated_lrd, custom };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::fbm: return "fbm";
    case FamilyKind::integrated_srd: return "integrated_srd";
    case FamilyKind::integrated_lrd: return "integrated_lrd";
    case FamilyKind::custom: return "custom";
  }
  return "?";
}

/// Input process X together with the drain rate c of the storage.
struct ProcessSpec {
  VarianceFunction variance;
  double drift_c;
  FamilyKind family;
  double hurst = std::numeric_limits<double>::quiet_NaN();  // fbm only
  std::optional<Correlation> correlation;                    // integrated families only

  double alpha() const { return variance.index_alpha(); }
};

inline void check_drift(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("drift rate c must be positive");
}

inline ProcessSpec make_fbm(double hurst, double c) {
  check_drift(c);
  return ProcessSpec{fbm_variance(hurst), c, FamilyKind::fbm, hurst, std::nullopt};
}

namespace detail {

inline VarianceFunction integrated_variance_function(const Correlation& corr, double alpha,
                                                     std::string tag, bool srd) {
  VarianceFunction::Fn eval;
  if (corr.closed_variance) {
    eval = corr.closed_variance;
  } else {
    QuadratureOptions opt;
    opt.truncate_at_cutoff = srd;
    eval = [corr, opt](double t) { return integrated_variance(corr, t, opt); };
  }
  VarianceFunction::Fn deriv;
  if (corr.closed_integral) {
    deriv = [f = corr.closed_integral](double t) { return 2.0 * f(t); };
  }
  // Integrated processes are differentiable, hence sigma^2(t) ~ t^2 at zero.
  return VarianceFunction(std::move(eval), alpha, 1.0, std::move(deriv), {}, std::move(tag));
}

}  // namespace detail

/// Integrated short-range input. Conditions S1-S3 are checked up front.
inline ProcessSpec make_integrated_srd(const Correlation& corr, double c) {
  check_drift(c);
  (void)srd_constants(corr);
  return ProcessSpec{detail::integrated_variance_function(corr, 0.5, "integrated_srd:" + corr.tag, true),
                     c, FamilyKind::integrated_srd, std::numeric_limits<double>::quiet_NaN(), corr};
}

/// Integrated long-range input; alpha is the index of sigma^2 (R varies with
/// index 2 alpha - 2).
inline ProcessSpec make_integrated_lrd(const Correlation& corr, double alpha, double c) {
  check_drift(c);
  if (!(alpha > 0.5 && alpha < 1.0)) throw ConfigError("LRD index alpha must lie in (1/2,1)");
  if (!(corr.R(0.0) > 0.0)) throw ConfigError("LRD correlation must be strictly positive");
  return ProcessSpec{detail::integrated_variance_function(corr, alpha, "integrated_lrd:" + corr.tag, false),
                     c, FamilyKind::integrated_lrd, std::numeric_limits<double>::quiet_NaN(), corr};
}

inline ProcessSpec make_custom(VarianceFunction variance, double c) {
  check_drift(c);
  return ProcessSpec{std::move(variance), c, FamilyKind::custom,
                     std::numeric_limits<double>::quiet_NaN(), std::nullopt};
}

enum class Regime { zero, finite, infinite };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::zero: return "zero";
    case Regime::finite: return "finite";
    case Regime::infinite: return "infinite";
  }
  return "?";
}

struct RegimeClass {
  double phi;  // +inf for the infinite regime
  Regime regime;
  bool condition_B_ok;
  double alpha;
  Trace trace;  // (t, sigma^2(t)/t) at every probe
};

inline std::vector<double> default_probes() {
  return {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
}

/// Splits the process into the phi = 0 / finite / infinite regimes, where
/// phi = lim sigma^2(t)/t. The regular-variation index decides the regime
/// when alpha != 1/2; at alpha = 1/2 the limit itself is probed.
///
/// A ratio is declared converged when three successive probe ratios agree to
/// 1e-3 relative, and divergent when it exceeds 1e6 while still increasing.
inline RegimeClass classify_regime(const ProcessSpec& spec,
                                   std::span<const double> probes = {}) {
  std::vector<double> owned;
  if (probes.empty()) {
    owned = default_probes();
    probes = owned;
  }
  if (probes.size() < 3) throw ConfigError("classify_regime needs at least three probes");
  for (std::size_t i = 1; i < probes.size(); ++i)
    if (!(probes[i] > probes[i - 1])) throw ConfigError("probe times must be increasing");
  if (probes.back() < 1e6) throw ConfigError("last probe must be >= 1e6");

  RegimeClass out{};
  out.alpha = spec.alpha();
  for (double t : probes) out.trace.emplace_back(t, spec.variance(t) / t);
  const std::size_t n = out.trace.size();
  auto ratio = [&](std::size_t i) { return out.trace[i].second; };

  bool increasing = true;
  bool decreasing = true;
  for (std::size_t i = n - 3; i + 1 < n; ++i) {
    if (!(ratio(i + 1) > ratio(i))) increasing = false;
    if (!(ratio(i + 1) < ratio(i))) decreasing = false;
  }
  bool converged = true;
  for (std::size_t i = n - 3; i + 1 < n; ++i) {
    const double a = ratio(i), b = ratio(i + 1);
    if (!(std::abs(b - a) < 1e-3 * std::max(std::abs(a), std::abs(b)))) converged = false;
  }

  const double alpha = out.alpha;
  if (alpha < 0.5) {
    if (!(decreasing || converged))
      throw InconclusiveClassification("sigma^2(t)/t does not decay although alpha < 1/2",
                                       out.trace);
    out.phi = 0.0;
    out.regime = Regime::zero;
    out.condition_B_ok = true;
  } else if (alpha > 0.5) {
    if (!(increasing || converged))
      throw InconclusiveClassification("sigma^2(t)/t does not grow although alpha > 1/2",
                                       out.trace);
    out.phi = std::numeric_limits<double>::infinity();
    out.regime = Regime::infinite;
    out.condition_B_ok = true;
  } else if (converged && ratio(n - 1) > 1e-12) {
    out.phi = ratio(n - 1);
    out.regime = Regime::finite;
    out.condition_B_ok = true;
  } else if (decreasing && ratio(n - 1) < 1e-3 * ratio(0)) {
    out.phi = 0.0;
    out.regime = Regime::zero;
    out.condition_B_ok = false;
  } else if (increasing && ratio(n - 1) > 1e6) {
    out.phi = std::numeric_limits<double>::infinity();
    out.regime = Regime::infinite;
    out.condition_B_ok = true;
  } else {
    throw InconclusiveClassification("sigma^2(t)/t neither converges nor diverges", out.trace);
  }
  return out;
}

/// gamma(k) = Cov of increments k steps apart:
/// (sigma^2((k+1)d) + sigma^2((k-1)d) - 2 sigma^2(k d)) / 2.
inline std::vector<double> increment_autocovariance(const VarianceFunction& v, double delta,
                                                    std::size_t n) {
  if (!(delta > 0.0)) throw ConfigError("grid step must be positive");
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kd = static_cast<double>(k);
    g[k] = 0.5 * (v((kd + 1.0) * delta) + v((kd - 1.0) * delta) - 2.0 * v(kd * delta));
  }
  return g;
}

/// Dense Toeplitz covariance of the first n increments on the grid delta*Z.
inline Eigen::MatrixXd covariance_increments(const ProcessSpec& spec, double delta,
                                             std::size_t n) {
  if (n < 1) throw ConfigError("covariance_increments needs n >= 1");
  const auto g = increment_autocovariance(spec.variance, delta, n);
  Eigen::MatrixXd cov(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) cov(j, k) = g[j > k ? j - k : k - j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo < -1e-10 * hi)
    throw NumericalError("invalid variance function: increment covariance is indefinite "
                         "(smallest eigenvalue " + std::to_string(lo) + ")");
  return cov;
}

}  // namespace gstorage
