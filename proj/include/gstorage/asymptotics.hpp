#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "errors.hpp"
#include "normal.hpp"
#include "process.hpp"
#include "storage.hpp"

namespace gstorage {

/// t* = alpha / (c (1 - alpha)), the limiting optimizer.
inline double optimizer_limit(double alpha, double c) { return alpha / (c * (1.0 - alpha)); }

struct CoreQuantities {
  double u;
  double t_star;
  double t_u;            // argmin_t u(1+ct)/sigma(ut)
  double m_u;            // the minimum value
  double delta_u_scale;  // Delta(u)
  double A;
  double B;
  double f_u;
};

namespace detail {

// log(u(1+ct)/sigma(ut)) - log u
inline double log_distance(const ProcessSpec& s, double u, double t) {
  return std::log1p(s.drift_c * t) - 0.5 * std::log(s.variance(u * t));
}

inline double log_distance_slope(const ProcessSpec& s, double u, double t) {
  return s.drift_c / (1.0 + s.drift_c * t) -
         0.5 * u * s.variance.derivative(u * t) / s.variance(u * t);
}

inline double minimize_distance(const ProcessSpec& s, double u, double t_star) {
  const double lo0 = t_star / 10.0;
  const double hi0 = t_star * 10.0;
  // Golden-section search locates the basin; the stationarity condition is
  // then solved directly, since a minimizer is only resolvable to about
  // sqrt(machine epsilon) from function values alone.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo0, b = hi0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = log_distance(s, u, x1), f2 = log_distance(s, u, x2);
  for (int it = 0; it < 200 && (b - a) > 1e-9 * (a + b); ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = log_distance(s, u, x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = log_distance(s, u, x2);
    }
  }
  const double golden = 0.5 * (a + b);
  if (golden < lo0 * (1.0 + 1e-6) || golden > hi0 * (1.0 - 1e-6))
    throw NumericalError("m(u) optimization failed: minimum not interior to [t*/10, 10 t*] at u = " +
                         std::to_string(u));

  auto slope = [&](double t) { return log_distance_slope(s, u, t); };
  double lo = golden, hi = golden;
  double width = 1e-6 * golden;
  for (int i = 0; i < 40; ++i, width *= 2.0) {
    lo = std::max(lo0, golden - width);
    hi = std::min(hi0, golden + width);
    if (slope(lo) < 0.0 && slope(hi) > 0.0) break;
  }
  if (!(slope(lo) < 0.0 && slope(hi) > 0.0)) return golden;
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  auto [r0, r1] = boost::math::tools::toms748_solve(slope, lo, hi, tol, iters);
  return 0.5 * (r0 + r1);
}

// Generalized inverse of sigma by geometric bracketing and bisection.
inline double inverse_sd(const VarianceFunction& v, double y) {
  if (auto exact = v.exact_inverse_sd(y)) return *exact;
  if (!(y > 0.0)) throw NumericalError("asymptotic inverse failed: non-positive argument");
  double lo = 0.0, hi = 1.0;
  int grow = 0;
  while (v.sd(hi) <= y) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 1100) throw NumericalError("asymptotic inverse failed: sigma stays below target");
  }
  for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (v.sd(mid) > y ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// t*, t_u, m(u), Delta(u), A, B and f(u) for the given level u.
inline CoreQuantities core_quantities(const ProcessSpec& spec, const RegimeClass& regime, double u) {
  if (!(u > 0.0)) throw ConfigError("level u must be positive");
  const double alpha = spec.alpha();
  const double c = spec.drift_c;
  CoreQuantities q{};
  q.u = u;
  q.t_star = optimizer_limit(alpha, c);
  q.t_u = detail::minimize_distance(spec, u, q.t_star);
  q.m_u = u * (1.0 + c * q.t_u) / spec.variance.sd(u * q.t_u);
  if (regime.regime == Regime::finite) {
    q.delta_u_scale = 1.0;
  } else {
    const double y = std::numbers::sqrt2 * spec.variance(u * q.t_star) / (u * (1.0 + c * q.t_star));
    q.delta_u_scale = detail::inverse_sd(spec.variance, y);
  }
  q.A = 1.0 / ((1.0 - alpha) * std::pow(q.t_star, alpha));
  q.B = alpha / std::pow(q.t_star, alpha + 2.0);
  q.f_u = std::sqrt(2.0 * std::numbers::pi * q.A / q.B) * u / (q.m_u * q.delta_u_scale);
  return q;
}

/// Standard deviation of the normalized field X(ut) m(u) / (u(1+ct)); equals 1 at t_u.
inline double normalized_sd(const ProcessSpec& spec, const CoreQuantities& q, double t) {
  return spec.variance.sd(q.u * t) * q.m_u / (q.u * (1.0 + spec.drift_c * t));
}

enum class ApproxKind { point, sup_window, inf_window, prop1_bound };

inline const char* to_string(ApproxKind k) {
  switch (k) {
    case ApproxKind::point: return "point";
    case ApproxKind::sup_window: return "sup";
    case ApproxKind::inf_window: return "inf";
    case ApproxKind::prop1_bound: return "prop1_bound";
  }
  return "?";
}

/// Pickands-type constants injected into the formulas. Missing ones are
/// replaced by 1 and the approximation is flagged "constant_free".
struct PickandsConstants {
  std::optional<double> discrete_rate;    // H_eta^delta (finite regime)
  std::optional<double> continuous_rate;  // H_{B_alpha} (infinite regime)
  std::optional<double> window_sup;       // H_eta([0,T]_delta)
  std::optional<double> window_inf;       // G_eta([0,T]_delta)
};

struct AsymptoticApproximation {
  ApproxKind kind = ApproxKind::point;
  Regime regime = Regime::zero;
  double u = 0.0;
  double T = 0.0;
  double delta = 0.0;
  double prefactor = 0.0;
  double psi_m = 0.0;
  double log_psi_m = 0.0;
  double value = 0.0;
  double log_value = 0.0;
  CoreQuantities core{};
  std::vector<std::pair<std::string, double>> constants_used;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
};

namespace detail {

inline void require_supported(const RegimeClass& regime) {
  if (!regime.condition_B_ok)
    throw ConfigError("out of scope: alpha = 1/2 with phi = 0 (condition B fails)");
}

inline double take_constant(AsymptoticApproximation& a, const char* name,
                            const std::optional<double>& v) {
  if (v) {
    if (!(*v > 0.0)) throw ConfigError(std::string("Pickands constant ") + name + " must be positive");
    a.constants_used.emplace_back(name, *v);
    return *v;
  }
  if (!a.has_flag("constant_free")) a.flags.emplace_back("constant_free");
  return 1.0;
}

inline void finish(AsymptoticApproximation& a) {
  a.psi_m = normal_survival(a.core.m_u);
  a.log_psi_m = log_normal_survival(a.core.m_u);
  a.value = a.prefactor * a.psi_m;
  a.log_value = std::log(a.prefactor) + a.log_psi_m;
  if (a.value > 1.0) a.flags.emplace_back("exceeds_one");
}

inline double zero_regime_prefactor(const ProcessSpec& spec, const CoreQuantities& q, double delta) {
  const double alpha = spec.alpha();
  return std::sqrt(2.0 * std::numbers::pi * alpha) * q.u /
         (delta * spec.drift_c * std::pow(1.0 - alpha, 1.5) * q.m_u);
}

inline AsymptoticApproximation start(ApproxKind kind, const ProcessSpec& spec,
                                     const RegimeClass& regime, double u, double T, double delta) {
  if (!(delta > 0.0)) throw ConfigError("grid step delta must be positive");
  if (!(T >= 0.0)) throw ConfigError("window T must be >= 0");
  require_supported(regime);
  AsymptoticApproximation a;
  a.kind = kind;
  a.regime = regime.regime;
  a.u = u;
  a.T = T;
  a.delta = delta;
  a.core = core_quantities(spec, regime, u);
  return a;
}

}  // namespace detail

/// P(Q_delta(0) > u) ~ prefactor * Psi(m(u)).
inline AsymptoticApproximation predict_point(const ProcessSpec& spec, const RegimeClass& regime,
                                             double u, double delta,
                                             const PickandsConstants& k = {}) {
  auto a = detail::start(ApproxKind::point, spec, regime, u, 0.0, delta);
  switch (regime.regime) {
    case Regime::zero:
      a.prefactor = detail::zero_regime_prefactor(spec, a.core, delta);
      break;
    case Regime::finite:
      a.prefactor = detail::take_constant(a, "H_eta_delta", k.discrete_rate) * a.core.f_u;
      break;
    case Regime::infinite:
      a.prefactor = detail::take_constant(a, "H_B_alpha", k.continuous_rate) * a.core.f_u;
      break;
  }
  detail::finish(a);
  return a;
}

/// P(sup over [0,T]_delta of Q_delta > u).
inline AsymptoticApproximation predict_sup(const ProcessSpec& spec, const RegimeClass& regime,
                                           double u, double T, double delta,
                                           const PickandsConstants& k = {}) {
  auto a = detail::start(ApproxKind::sup_window, spec, regime, u, T, delta);
  const std::size_t steps = window_steps(T, delta);
  switch (regime.regime) {
    case Regime::zero:
      a.prefactor = static_cast<double>(1 + steps) * detail::zero_regime_prefactor(spec, a.core, delta);
      break;
    case Regime::finite: {
      // One grid point: E exp(sqrt2 eta(0) - 0) = 1 exactly.
      const double window =
          steps == 0 ? 1.0 : detail::take_constant(a, "H_eta_window", k.window_sup);
      a.prefactor = window * detail::take_constant(a, "H_eta_delta", k.discrete_rate) * a.core.f_u;
      break;
    }
    case Regime::infinite:
      a.prefactor = detail::take_constant(a, "H_B_alpha", k.continuous_rate) * a.core.f_u;
      break;
  }
  detail::finish(a);
  return a;
}

/// Upper bound Psi(m(u)) Psi(Q u / sigma^2(u)) for the inf-window probability
/// in the phi = 0 regime, with Q at 0.99 of its admissible supremum.
inline AsymptoticApproximation predict_prop1_bound(const ProcessSpec& spec,
                                                   const RegimeClass& regime, double u, double T,
                                                   double delta) {
  if (regime.regime != Regime::zero) throw ConfigError("the inf upper bound applies to the phi = 0 regime only");
  const std::size_t steps = window_steps(T, delta);
  if (steps < 1) throw ConfigError("the inf upper bound needs T >= delta");
  auto a = detail::start(ApproxKind::prop1_bound, spec, regime, u, T, delta);
  const double alpha = spec.alpha();
  const double ts = a.core.t_star;
  double sup_sd = 0.0;
  for (std::size_t j = 0; j <= steps; ++j)
    sup_sd = std::max(sup_sd, spec.variance.sd(static_cast<double>(j) * delta));
  const double q_tilde =
      0.99 * (1.0 + spec.drift_c * ts) / (2.0 * std::pow(ts, 2.0 * alpha)) * sup_sd;
  a.constants_used.emplace_back("Q_tilde", q_tilde);
  const double arg = q_tilde * u / spec.variance(u);
  a.prefactor = normal_survival(arg);
  a.flags.emplace_back("upper_bound_only");
  const double eps = 0.01;
  const bool hypothesis = u > 1.0 && spec.variance.sd(u) <= std::sqrt(u) / std::pow(std::log(u), 0.25 + eps);
  if (!hypothesis) a.flags.emplace_back("prop1_hypothesis_unverified");
  a.psi_m = normal_survival(a.core.m_u);
  a.log_psi_m = log_normal_survival(a.core.m_u);
  a.value = a.prefactor * a.psi_m;
  a.log_value = log_normal_survival(arg) + a.log_psi_m;
  return a;
}

/// P(inf over [0,T]_delta of Q_delta > u). In the phi = 0 regime only an
/// upper bound is available and that bound is returned instead.
inline AsymptoticApproximation predict_inf(const ProcessSpec& spec, const RegimeClass& regime,
                                           double u, double T, double delta,
                                           const PickandsConstants& k = {}) {
  const std::size_t steps = window_steps(T, delta);
  if (regime.regime == Regime::zero) {
    if (steps == 0) {
      auto a = predict_point(spec, regime, u, delta, k);
      a.kind = ApproxKind::inf_window;
      return a;
    }
    return predict_prop1_bound(spec, regime, u, T, delta);
  }
  auto a = detail::start(ApproxKind::inf_window, spec, regime, u, T, delta);
  if (regime.regime == Regime::finite) {
    const double window =
        steps == 0 ? 1.0 : detail::take_constant(a, "G_eta_window", k.window_inf);
    a.prefactor = window * detail::take_constant(a, "H_eta_delta", k.discrete_rate) * a.core.f_u;
  } else {
    a.prefactor = detail::take_constant(a, "H_B_alpha", k.continuous_rate) * a.core.f_u;
  }
  detail::finish(a);
  return a;
}

/// Closed-form fBm constants C_H, D_H, E_H.
struct FbmConstants {
  double C;
  double D;
  double E;
};

inline FbmConstants corollary_constants(double H, double c) {
  if (!(H > 0.0 && H < 1.0)) throw ConfigError("Hurst parameter must lie in (0,1)");
  check_drift(c);
  FbmConstants k;
  k.C = std::pow(c, H) / (std::pow(H, H) * std::pow(1.0 - H, 1.0 - H));
  k.D = std::sqrt(2.0 * std::numbers::pi) * std::pow(H, H + 0.5) /
        (std::pow(c, H + 1.0) * std::pow(1.0 - H, H + 0.5));
  k.E = std::pow(2.0, 0.5 - 0.5 / H) * std::sqrt(std::numbers::pi) /
        (std::sqrt(H) * std::sqrt(1.0 - H));
  return k;
}

/// Integrated short-range input: P(Q(0) > u) ~ A H_xi^delta exp(-cGu) with
/// A = 1/(c^2 G exp(c^2 G^2 D)) and xi = c G Z / sqrt2.
struct SrdAsymptoticConstants {
  double A;
  double decay_rate;  // c G
  double xi_variance_scale;  // (cG)^2 / 2
};

inline SrdAsymptoticConstants srd_corollary_constants(double c, double G, double D) {
  check_drift(c);
  return {1.0 / (c * c * G * std::exp(c * c * G * G * D)), c * G, 0.5 * c * c * G * G};
}

/// Variance scale 2c^2/phi^2 turning X into eta = c sqrt2 / phi X.
inline double eta_variance_scale(const ProcessSpec& spec, const RegimeClass& regime) {
  if (regime.regime != Regime::finite) throw ConfigError("eta is defined only when 0 < phi < inf");
  return 2.0 * spec.drift_c * spec.drift_c / (regime.phi * regime.phi);
}

/// Sum over the localization window of Psi(m(u)/sigma_{X_u}(t)), t on the
/// grid delta/u within u^{-1/2} ln u of t_u; with T > 0 the windows for
/// every origin j delta/u, j <= T/delta, are added.
struct SingleSum {
  double log_value;
  double log_psi_m;
  std::size_t points;
  double ratio_to_psi_m() const { return std::exp(log_value - log_psi_m); }
  double value() const { return std::exp(log_value); }
};

inline SingleSum single_sum(const ProcessSpec& spec, const RegimeClass& regime, double u,
                            double delta, double T = 0.0) {
  if (regime.regime != Regime::zero) throw ConfigError("single_sum applies to the phi = 0 regime");
  if (!(u > 1.0)) throw ConfigError("single_sum needs u > 1");
  const auto q = core_quantities(spec, regime, u);
  const double h = delta / u;
  const double half = std::log(u) / std::sqrt(u);
  const std::size_t steps = window_steps(T, delta);
  SingleSum s{-std::numeric_limits<double>::infinity(), log_normal_survival(q.m_u), 0};
  for (std::size_t j = 0; j <= steps; ++j) {
    const double origin = static_cast<double>(j) * h;
    auto k_lo = static_cast<long long>(std::floor((origin + q.t_u - half) / h)) + 1;
    auto k_hi = static_cast<long long>(std::ceil((origin + q.t_u + half) / h)) - 1;
    if (k_hi < k_lo) k_lo = k_hi = std::llround((origin + q.t_u) / h);
    k_lo = std::max<long long>(k_lo, static_cast<long long>(j) + 1);
    for (long long k = k_lo; k <= k_hi; ++k) {
      const double t = static_cast<double>(k - static_cast<long long>(j)) * h;
      const double arg = u * (1.0 + spec.drift_c * t) / spec.variance.sd(u * t);
      s.log_value = log_add_exp(s.log_value, log_normal_survival(arg));
      ++s.points;
    }
  }
  return s;
}

}  // namespace gstorage
