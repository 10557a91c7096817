#pragma once

// Deterministic invariant suite behind `gstorage validate`. Nothing here
// draws random numbers except the storage brute-force check, which uses a
// fixed stream.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "format.hpp"
#include "normal.hpp"
#include "process.hpp"
#include "rng.hpp"
#include "storage.hpp"

namespace gstorage {

struct ValidationCheck {
  std::string name;
  bool ok;
  std::string detail;
};

namespace detail {

inline double rel_err(double a, double b) { return std::abs(a / b - 1.0); }

inline ValidationCheck check_normal() {
  const double e1 = rel_err(normal_survival(1.959964), 0.024999999096442402);
  const double e2 = rel_err(log_normal_survival(38.0), -726.5572160188201);
  const double e3 = rel_err(normal_survival(-3.0), 0.9986501019683699);
  const double worst = std::max({e1, e2, e3});
  return {"normal_survival", worst < 1e-12, "max rel err " + format_double(worst)};
}

inline ValidationCheck check_classification() {
  std::string why;
  auto expect = [&](const ProcessSpec& s, Regime r, const char* label) {
    const auto got = classify_regime(s).regime;
    if (got != r) why += std::string(label) + " -> " + to_string(got) + "; ";
  };
  expect(make_fbm(0.25, 1.0), Regime::zero, "fbm 0.25");
  expect(make_fbm(0.5, 1.0), Regime::finite, "fbm 0.5");
  expect(make_fbm(0.75, 1.0), Regime::infinite, "fbm 0.75");
  const auto srd = classify_regime(make_integrated_srd(exp_correlation(1.0), 1.0));
  if (srd.regime != Regime::finite || std::abs(srd.phi - 2.0) > 1e-3)
    why += "integrated exp: phi " + format_double(srd.phi) + "; ";
  return {"classify_regime", why.empty(), why.empty() ? "fbm 0.25/0.5/0.75 and exp-SRD phi=2" : why};
}

inline ValidationCheck check_increments() {
  const auto bm = increment_autocovariance(fbm_variance(0.5), 1.0, 8);
  double off = 0.0;
  for (std::size_t k = 1; k < bm.size(); ++k) off = std::max(off, std::abs(bm[k]));
  const auto f = increment_autocovariance(fbm_variance(0.75), 1.0, 2);
  const double lag1 = std::abs(f[1] - (std::pow(2.0, 1.5) / 2.0 - 1.0));
  const bool ok = std::abs(bm[0] - 1.0) < 1e-14 && off < 1e-14 && lag1 < 1e-14;
  return {"increment_autocovariance", ok,
          "BM off-diagonal " + format_double(off) + ", fbm 0.75 lag-1 err " + format_double(lag1)};
}

inline ValidationCheck check_corollaries() {
  double worst_t = 0.0, worst_m = 0.0, worst_f = 0.0;
  for (int i = 1; i <= 9; ++i) {
    if (i == 5) continue;
    const double H = 0.1 * i;
    const auto spec = make_fbm(H, 1.0);
    const auto regime = classify_regime(spec);
    const auto k = corollary_constants(H, 1.0);
    for (double u : {10.0, 1e3, 1e6}) {
      const auto q = core_quantities(spec, regime, u);
      worst_t = std::max(worst_t, std::abs(q.t_u - q.t_star) / q.t_star);
      worst_m = std::max(worst_m, rel_err(q.m_u, k.C * std::pow(u, 1.0 - H)));
      const auto p = predict_point(spec, regime, u, 1.0, {});
      const double prefactor_closed =
          H < 0.5 ? k.D * std::pow(u, H)
                  : k.E * std::pow(k.C * std::pow(u, 1.0 - H), 1.0 / H - 1.0);
      worst_f = std::max(worst_f, rel_err(p.prefactor, prefactor_closed));
    }
  }
  // H = 1/2: the eta constant is (2c^2/phi^2) H_B^{2c^2 delta}, and the
  // closed form exp(-2cu) holds only up to O(1/u); compare far out, in logs.
  const auto bm = make_fbm(0.5, 1.0);
  const auto bm_regime = classify_regime(bm);
  const auto p = predict_point(bm, bm_regime, 1e6, 1.0, {});
  const double scale = eta_variance_scale(bm, bm_regime);
  worst_f = std::max(worst_f, std::abs(std::expm1(p.log_value + std::log(scale) + 2e6)));
  const bool ok = worst_t <= 1e-8 && worst_m <= 1e-8 && worst_f <= 1e-6;
  return {"closed_form_identities", ok,
          "t_u " + format_double(worst_t) + ", m(u) " + format_double(worst_m) + ", prefactor " +
              format_double(worst_f)};
}

inline ValidationCheck check_multiplicity() {
  const auto z = make_fbm(0.25, 1.0);
  const auto rz = classify_regime(z);
  const auto i = make_fbm(0.75, 1.0);
  const auto ri = classify_regime(i);
  const double zr = predict_sup(z, rz, 50.0, 1.0, 0.1, {}).value / predict_point(z, rz, 50.0, 0.1, {}).value;
  const double ir = predict_sup(i, ri, 50.0, 1.0, 0.1, {}).value / predict_point(i, ri, 50.0, 0.1, {}).value;
  const bool ok = std::abs(zr - 11.0) < 1e-12 * 11.0 && std::abs(ir - 1.0) < 1e-15;
  return {"sup_multiplicity", ok, "zero " + format_double(zr) + " (expect 11), infinite " + format_double(ir)};
}

inline ValidationCheck check_single_sum() {
  const auto s = make_fbm(0.25, 1.0);
  const auto r = classify_regime(s);
  double ratio[2];
  const double us[2] = {1e3, 1e5};
  for (int k = 0; k < 2; ++k) {
    const auto ss = single_sum(s, r, us[k], 1.0);
    const auto p = predict_point(s, r, us[k], 1.0, {});
    ratio[k] = std::exp(ss.log_value - p.log_value);
  }
  const bool ok = ratio[0] >= 0.9 && ratio[0] <= 1.1 && ratio[1] >= 0.97 && ratio[1] <= 1.03;
  return {"single_sum", ok, "u=1e3 " + format_double(ratio[0]) + ", u=1e5 " + format_double(ratio[1])};
}

inline ValidationCheck check_prop1() {
  const auto s = make_fbm(0.25, 1.0);
  const auto r = classify_regime(s);
  std::vector<double> log_ratio;
  for (double u : {1e2, 1e3, 1e4}) {
    const auto b = predict_prop1_bound(s, r, u, 1.0, 1.0);
    const auto p = predict_point(s, r, u, 1.0, {});
    log_ratio.push_back(b.log_value - p.log_value);
  }
  const bool ok = log_ratio[0] < 0.0 && log_ratio[1] < log_ratio[0] && log_ratio[2] < log_ratio[1];
  std::vector<std::string> txt;
  for (double x : log_ratio) txt.push_back(format_double(x));
  return {"prop1_dominance", ok, "log(bound/point) " + join(txt, " ")};
}

// Near its maximum the normalized standard deviation behaves like
// 1 - B/(2A) (t - t_u)^2; fBm is self-similar so this is exact in the limit x -> 0.
inline ValidationCheck check_local_expansion() {
  double worst = 0.0;
  for (double H : {0.25, 0.5, 0.75}) {
    const auto spec = make_fbm(H, 1.0);
    const auto q = core_quantities(spec, classify_regime(spec), 1e4);
    const double x = 1e-3 * q.t_star;
    const double curv = (2.0 - normalized_sd(spec, q, q.t_u + x) - normalized_sd(spec, q, q.t_u - x)) / (2 * x * x);
    worst = std::max(worst, rel_err(curv, q.B / (2.0 * q.A)));
  }
  return {"local_expansion", worst < 1e-4, "curvature rel err " + format_double(worst)};
}

inline ValidationCheck check_storage_bruteforce() {
  RngStream rng(20240601, 7);
  std::size_t bad = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t n = 2 + rng.index(11);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    const std::size_t w = n > 2 ? rng.index(n - 1) : 0;
    const auto r = storage_window(x, w);
    double sup = -1.0, inf = 1e300;
    for (std::size_t j = 0; j <= w; ++j) {
      double q = 0.0;
      for (std::size_t k = j; k < n; ++k) q = std::max(q, x[k] - x[j]);
      sup = std::max(sup, q);
      inf = std::min(inf, q);
    }
    double q0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) q0 = std::max(q0, x[k] - x[0]);
    if (r.sup_window != sup || r.inf_window != inf || r.q0 != q0) ++bad;
  }
  return {"storage_bruteforce", bad == 0, std::to_string(bad) + " mismatches in 2000 paths"};
}

}  // namespace detail

inline std::vector<ValidationCheck> run_invariant_suite() {
  std::vector<ValidationCheck> out;
  auto guard = [&](ValidationCheck (*fn)(), const char* name) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  };
  guard(detail::check_normal, "normal_survival");
  guard(detail::check_classification, "classify_regime");
  guard(detail::check_increments, "increment_autocovariance");
  guard(detail::check_corollaries, "closed_form_identities");
  guard(detail::check_multiplicity, "sup_multiplicity");
  guard(detail::check_single_sum, "single_sum");
  guard(detail::check_prop1, "prop1_dominance");
  guard(detail::check_local_expansion, "local_expansion");
  guard(detail::check_storage_bruteforce, "storage_bruteforce");
  return out;
}

}  // namespace gstorage
