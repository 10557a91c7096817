#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "path.hpp"
#include "process.hpp"
#include "storage.hpp"

namespace gstorage {

struct HorizonOptions {
  double safety = 3.0;
  /// Relative weight allowed beyond the horizon: the standardized distance
  /// (u + cL)/sigma(L) at the horizon must exceed sqrt(m(u)^2 + 2 ln(1/eps)).
  /// Zero disables this rule.
  double tail_eps = 1e-4;
  std::size_t max_steps = 20'000'000;
};

namespace detail {

inline double tail_horizon(const ProcessSpec& spec, double u, double t_u, double m_u, double eps) {
  const double target = std::sqrt(m_u * m_u + 2.0 * std::log(1.0 / eps));
  auto dist = [&](double L) { return (u + spec.drift_c * L) / spec.variance.sd(L); };
  double lo = std::max(u * t_u, 1e-12);
  if (dist(lo) >= target) return lo;
  double hi = 2.0 * lo;
  for (int i = 0; dist(hi) < target; ++i, hi *= 2.0) {
    lo = hi;
    if (i > 200) throw ConfigError("horizon too large: tail rule does not terminate");
  }
  for (int i = 0; i < 100 && hi - lo > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dist(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace detail

/// Grid long enough to contain the region near u t_u that carries the
/// exceedance probability: at least safety * u * max(t_u, t*) + T, and far
/// enough that the Gaussian tail beyond it is negligible.
inline GridSpec required_horizon(const ProcessSpec& spec, const RegimeClass& regime, double u,
                                 double delta, double T_window, const HorizonOptions& opt = {}) {
  if (!(u >= 0.0)) throw ConfigError("level u must be >= 0");
  if (!(delta > 0.0)) throw ConfigError("grid step delta must be positive");
  if (!(opt.safety >= 1.0)) throw ConfigError("safety factor must be >= 1");
  const double t_star = optimizer_limit(spec.alpha(), spec.drift_c);
  double t_u = t_star;
  double m_u = 0.0;
  if (u > 0.0) {
    try {
      const auto q = core_quantities(spec, regime, u);
      t_u = q.t_u;
      m_u = q.m_u;
    } catch (const NumericalError&) {
      // Small u: the optimizer can leave its bracket; t* still locates the region.
      m_u = u * (1.0 + spec.drift_c * t_star) / spec.variance.sd(u * t_star);
    }
  }
  const std::size_t window = window_steps(T_window, delta);
  const double T = static_cast<double>(window) * delta;
  double time = opt.safety * u * std::max(t_u, t_star) + T;
  if (opt.tail_eps > 0.0)
    time = std::max(time, detail::tail_horizon(spec, u, t_u, m_u, opt.tail_eps) + T);
  const double steps = std::ceil(time / delta * (1.0 - 1e-12));
  if (!(steps <= static_cast<double>(opt.max_steps)))
    throw ConfigError("horizon too large: " + std::to_string(steps) + " steps exceed the cap of " +
                      std::to_string(opt.max_steps) + "; use a larger delta or a smaller u");
  auto n = static_cast<std::size_t>(steps);
  n = std::max(n, window + 1);
  return GridSpec{delta, n};
}

}  // namespace gstorage
