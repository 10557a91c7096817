// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <gstorage/gstorage.hpp>

#include "cli.hpp"

using namespace gstorage;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) { return format_double(x); }

// H = delta^{-1} exp(-2 sum_k Psi(sqrt(k delta / 2)) / k), discrete Brownian Pickands constant.
double discrete_bm_pickands(double delta) {
  double s = 0.0;
  for (long k = 1;; ++k) {
    const double term = normal_survival(std::sqrt(k * delta / 2.0)) / static_cast<double>(k);
    s += term;
    if (term < 1e-18) break;
  }
  return std::exp(-2.0 * s) / delta;
}

// E exp(max_{0<=k<=n} W_k) for a Gaussian walk with N(-s^2/2, s^2) steps, by the
// Lindley recursion M_j = max(0, X + M_{j-1}) on a lattice of spacing h.
double lindley_window_constant(double step_var, std::size_t n, double h = 0.002, double L = 25.0) {
  const double s = std::sqrt(step_var), mu = -0.5 * step_var;
  const std::size_t N = static_cast<std::size_t>(L / h) + 1;
  const long reach = static_cast<long>(std::ceil((8.0 * s + std::abs(mu)) / h));
  // kernel[d + reach] = P(X in [(d - 1/2)h, (d + 1/2)h))
  std::vector<double> kernel(2 * reach + 1), below(2 * reach + 1);
  for (long d = -reach; d <= reach; ++d) {
    const double lo = ((d - 0.5) * h - mu) / s, hi = ((d + 0.5) * h - mu) / s;
    kernel[d + reach] = normal_cdf(hi) - normal_cdf(lo);
    below[d + reach] = normal_cdf(hi);  // P(X < (d + 1/2)h)
  }
  std::vector<double> mass(N, 0.0), next(N);
  mass[0] = 1.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      const double m = mass[i];
      if (m < 1e-300) continue;
      const long ii = static_cast<long>(i);
      // everything with i + d <= 0 collapses onto the atom at zero
      const long dzero = -ii;
      if (dzero >= -reach) next[0] += m * (dzero <= reach ? below[dzero + reach] : 1.0);
      for (long d = std::max<long>(1 - ii, -reach); d <= reach; ++d) {
        const long k = ii + d;
        if (k >= static_cast<long>(N)) break;
        next[k] += m * kernel[d + reach];
      }
    }
    mass.swap(next);
  }
  double e = 0.0;
  for (std::size_t i = 0; i < N; ++i) e += mass[i] * std::exp(static_cast<double>(i) * h);
  return e;
}

void report(int id, const char* title, const Outcome& o, double secs) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): "
            << o.detail.str() << " [" << fmt(std::round(secs * 100) / 100) << " s]" << std::endl;
}

// 1. storage_window against the exhaustive definition.
Outcome brute_force() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(2024, 1);
  std::size_t mismatches = 0, paths = 10000;
  for (std::size_t p = 0; p < paths; ++p) {
    const std::size_t n = 2 + rng.index(11);  // 2..12 points
    std::vector<double> d(n);
    d[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) d[k] = d[k - 1] + rng.normal() - 0.3;
    const std::size_t w = n > 2 ? rng.index(n - 1) : 0;
    const auto r = storage_window(d, w);
    double sup = -INFINITY, inf = INFINITY, q0 = 0.0;
    for (std::size_t j = 0; j <= w; ++j) {
      double q = -INFINITY;
      for (std::size_t k = j; k < n; ++k) q = std::max(q, d[k] - d[j]);
      if (j == 0) q0 = q;
      sup = std::max(sup, q);
      inf = std::min(inf, q);
    }
    if (r.q0 != q0 || r.sup_window != sup || r.inf_window != inf) ++mismatches;
  }
  const double secs = seconds_since(t0);
  o.detail << paths << " paths, " << mismatches << " mismatches";
  o.require(mismatches == 0, "exact equality");
  o.require(secs < 10.0, "runtime < 10 s");
  return o;
}

// 2. Brownian storage against exp(-2cu).
Outcome brownian() {
  Outcome o;
  ExperimentConfig cfg{make_fbm(0.5, 1.0)};
  cfg.delta = 0.001;
  cfg.u_list = {1.5};
  cfg.reps = 1'000'000;
  cfg.root_seed = 20240615;
  const auto res = estimate_probabilities(cfg);
  const auto& e = res.rows[0].at(ProbabilityKind::point).mc;
  const double cont = std::exp(-3.0);
  const double disc = discrete_bm_pickands(0.002) * cont;
  o.detail << "p_hat " << fmt(e.p_hat) << " se " << fmt(e.se) << ", continuous e^-3 " << fmt(cont)
           << ", discrete H^{2 delta} e^-3 " << fmt(disc) << ", horizon " << res.grid.horizon_n
           << " steps, truncated exceedances " << e.truncated_exceed_count << "/" << e.exceed_count;
  o.require(e.p_hat <= cont + 3.0 * e.se, "p_hat <= e^-3 + 3 se");
  o.require(std::abs(e.p_hat - disc) <= 3.0 * e.se, "|p_hat - discrete| <= 3 se");
  o.require(e.truncated_exceed_count * 100 < e.exceed_count, "truncation < 1%");
  return o;
}

// 3. Optimizer and closed-form identities for fBm.
Outcome identities() {
  Outcome o;
  double worst_t = 0, worst_m = 0, worst_f = 0;
  std::ostringstream half;
  for (int i = 1; i <= 9; ++i) {
    const double H = 0.1 * i;
    const auto spec = make_fbm(H, 1.0);
    const auto regime = classify_regime(spec);
    const auto k = corollary_constants(H, 1.0);
    for (double u : {10.0, 1e3, 1e6}) {
      const auto q = core_quantities(spec, regime, u);
      worst_t = std::max(worst_t, std::abs(q.t_u - q.t_star) / q.t_star);
      worst_m = std::max(worst_m, std::abs(q.m_u / (k.C * std::pow(u, 1.0 - H)) - 1.0));
      const auto p = predict_point(spec, regime, u, 1.0);
      double log_closed;
      if (i < 5) {
        log_closed = std::log(k.D * std::pow(u, H)) + log_normal_survival(k.C * std::pow(u, 1.0 - H));
      } else if (i == 5) {
        // H_eta^delta = (2c^2/phi^2) H_B^{2c^2 delta}: divide the scale out too
        log_closed = -2.0 * u - std::log(eta_variance_scale(spec, regime));
      } else {
        const double m = k.C * std::pow(u, 1.0 - H);
        log_closed = std::log(k.E * std::pow(m, 1.0 / H - 1.0)) + log_normal_survival(m);
      }
      const double err = std::abs(std::expm1(p.log_value - log_closed));
      if (i == 5) half << " u=" << fmt(u) << ":" << fmt(err);
      worst_f = std::max(worst_f, err);
    }
  }
  o.detail << "max |t_u/t*-1| " << fmt(worst_t) << ", max m(u) err " << fmt(worst_m)
           << ", max general vs closed-form err " << fmt(worst_f) << " (H=1/2" << half.str() << ")";
  o.require(worst_t <= 1e-8, "t_u");
  o.require(worst_m <= 1e-8, "m(u)");
  o.require(worst_f <= 1e-6, "general formula vs closed form within 1e-6 for every H and u");
  return o;
}

// 4. Window multiplicity in the three regimes.
Outcome multiplicity() {
  Outcome o;
  const double delta = 0.1;
  const auto z = make_fbm(0.25, 1.0);
  const auto rz = classify_regime(z);
  const auto inf_spec = make_fbm(0.75, 1.0);
  const auto ri = classify_regime(inf_spec);
  bool zero_ok = true, inf_ok = true;
  for (double T : {0.0, 0.3, 1.0, 2.05}) {
    for (double u : {20.0, 200.0}) {
      // Psi(m(u)) underflows at large u, so compare prefactors and logs
      const auto zs = predict_sup(z, rz, u, T, delta), zp = predict_point(z, rz, u, delta);
      const double expect = 1.0 + static_cast<double>(window_steps(T, delta));
      zero_ok = zero_ok && std::abs(zs.prefactor / zp.prefactor - expect) <= 2 * std::numeric_limits<double>::epsilon() * expect &&
                std::abs(zs.log_value - zp.log_value - std::log(expect)) <= 1e-12;
      const auto is = predict_sup(inf_spec, ri, u, T, delta), ip = predict_point(inf_spec, ri, u, delta);
      inf_ok = inf_ok && is.prefactor == ip.prefactor && is.log_value == ip.log_value;
    }
  }
  o.require(zero_ok, "zero regime ratio = 1 + floor(T/delta)");
  o.require(inf_ok, "infinite regime ratio = 1");

  // finite regime: Brownian motion, eta = sqrt2 B
  const auto bm = make_fbm(0.5, 1.0);
  const auto rb = classify_regime(bm);
  const double T = 1.0;
  const auto eta = bm.variance.scaled(eta_variance_scale(bm, rb));
  PickandsOptions opt;
  opt.estimator = WindowEstimator::tilted;
  const auto w = estimate_H_window(eta, grid_window(T, delta), 100000, 41, opt);
  PickandsConstants k;
  k.window_sup = w.value;
  k.discrete_rate = 1.0;
  const double ratio = predict_sup(bm, rb, 5.0, T, delta, k).value / predict_point(bm, rb, 5.0, delta, k).value;
  // step variance of sqrt2 eta over delta is 2 * 2 * delta
  const double exact = lindley_window_constant(4.0 * delta, window_steps(T, delta));
  o.detail << "zero/infinite exact; finite ratio " << fmt(ratio) << " se " << fmt(w.std_error)
           << " vs recursion " << fmt(exact);
  o.require(std::abs(ratio - exact) <= 3.0 * w.std_error, "finite ratio within 3 se");
  return o;
}

// 5. Pickands constants.
Outcome pickands() {
  Outcome o;
  const auto bm = fbm_variance(0.5);
  try {
    const auto e = estimate_H_rate(bm, 0.01, default_S_grid(0.01), 100000, 51);
    o.detail << "H^0.01 " << fmt(e.value) << " se " << fmt(e.std_error) << " (series "
             << fmt(discrete_bm_pickands(0.01)) << ")";
    o.require(e.value >= 0.85 && e.value <= 1.0, "value in [0.85, 1]");
  } catch (const RateNotConverged& ex) {
    o.require(false, std::string("plateau diagnostic: ") + ex.what());
  }
  PickandsOptions opt;
  const auto a = estimate_H_rate(bm.scaled(2.0), 0.01, {}, 100000, 52, opt);
  const auto b = estimate_H_rate(bm, 0.02, {}, 100000, 53, opt);
  const double comb = std::hypot(a.std_error, 2.0 * b.std_error);
  o.detail << "; H_sqrt2B^0.01 " << fmt(a.value) << " vs 2 H_B^0.02 " << fmt(2.0 * b.value) << " (comb se "
           << fmt(comb) << ")";
  o.require(std::abs(a.value - 2.0 * b.value) <= 3.0 * comb, "self-similarity");
  int worst_ok = 0, total = 0;
  double worst = 0;
  for (double s : {0.25, 1.0, 4.0})
    for (auto est : {WindowEstimator::crude, WindowEstimator::tilted}) {
      PickandsOptions wopt;
      wopt.estimator = est;
      const auto h = estimate_H_window(bm, {0.0, s}, 100000, 60 + total, wopt);
      const auto g = estimate_G_window(bm, {0.0, s}, 100000, 80 + total, wopt);
      const double zh = std::abs(h.value - 2.0 * normal_cdf(std::sqrt(s / 2))) / h.std_error;
      const double zg = std::abs(g.value - 2.0 * normal_survival(std::sqrt(s / 2))) / g.std_error;
      worst = std::max({worst, zh, zg});
      worst_ok += (zh <= 4.0) + (zg <= 4.0);
      total += 2;
    }
  o.detail << "; two-point oracles " << worst_ok << "/" << total << " within 4 se (worst " << fmt(worst) << " se)";
  o.require(worst_ok == total, "two-point oracles");
  return o;
}

// 6. Single-sum law in the zero regime.
Outcome single_sum_law() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = make_fbm(0.25, 1.0);
  const auto regime = classify_regime(spec);
  double r[2];
  const double us[2] = {1e3, 1e5};
  for (int i = 0; i < 2; ++i) {
    const auto s = single_sum(spec, regime, us[i], 1.0);
    r[i] = std::exp(s.log_value - predict_point(spec, regime, us[i], 1.0).log_value);
  }
  const double secs = seconds_since(t0);
  o.detail << "ratio " << fmt(r[0]) << " at u=1e3, " << fmt(r[1]) << " at u=1e5";
  o.require(r[0] >= 0.9 && r[0] <= 1.1, "[0.9,1.1] at 1e3");
  o.require(r[1] >= 0.97 && r[1] <= 1.03, "[0.97,1.03] at 1e5");
  o.require(secs < 1.0, "runtime < 1 s");
  return o;
}

// 7. Coupled ordering and the inf/sup trend for fBm 0.75.
Outcome ordering_trend() {
  Outcome o;
  ExperimentConfig cfg{make_fbm(0.75, 1.0)};
  cfg.delta = 0.1;
  cfg.T = 1.0;
  cfg.u_list = {6.0, 8.0, 10.0, 12.0, 14.0, 16.0};
  cfg.reps = 500'000;
  cfg.root_seed = 20240617;
  const auto res = estimate_probabilities(cfg);
  o.require(res.ordering_violations == 0, "per-path ordering");
  bool counts_ordered = true;
  std::vector<double> ratio, se;
  o.detail << "ordering violations " << res.ordering_violations << "; inf/sup:";
  for (const auto& row : res.rows) {
    const auto& inf = row.at(ProbabilityKind::inf).mc;
    const auto& pt = row.at(ProbabilityKind::point).mc;
    const auto& sup = row.at(ProbabilityKind::sup).mc;
    counts_ordered = counts_ordered && inf.exceed_count <= pt.exceed_count && pt.exceed_count <= sup.exceed_count;
    // inf-exceedances are a subset of sup-exceedances: binomial given the sup count
    const double r = static_cast<double>(inf.exceed_count) / static_cast<double>(sup.exceed_count);
    ratio.push_back(r);
    se.push_back(std::sqrt(r * (1 - r) / static_cast<double>(sup.exceed_count)));
    o.detail << " u=" << fmt(row.u) << " p_sup=" << fmt(sup.p_hat) << " r=" << fmt(std::round(r * 1e4) / 1e4)
             << "+-" << fmt(std::round(se.back() * 1e4) / 1e4);
  }
  o.require(counts_ordered, "mc_inf <= mc_point <= mc_sup");
  bool above = true;
  for (double r : ratio) above = above && r >= 0.8;
  o.require(above, "ratio >= 0.8 at every level");
  // increasing: weighted least-squares slope in u positive by 2 se
  double sw = 0, su = 0, sr = 0;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const double w = 1.0 / (se[i] * se[i]);
    sw += w;
    su += w * cfg.u_list[i];
    sr += w * ratio[i];
  }
  const double ubar = su / sw, rbar = sr / sw;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const double w = 1.0 / (se[i] * se[i]);
    num += w * (cfg.u_list[i] - ubar) * (ratio[i] - rbar);
    den += w * (cfg.u_list[i] - ubar) * (cfg.u_list[i] - ubar);
  }
  const double slope = num / den, slope_se = 1.0 / std::sqrt(den);
  o.detail << "; slope " << fmt(slope) << " se " << fmt(slope_se);
  o.require(slope > 2.0 * slope_se, "increasing in u");
  return o;
}

// 8. The inf bound is negligible against the point asymptotics.
Outcome prop1() {
  Outcome o;
  const auto spec = make_fbm(0.25, 1.0);
  const auto regime = classify_regime(spec);
  std::vector<double> lr;
  for (double u : {1e2, 1e3, 1e4})
    lr.push_back(predict_prop1_bound(spec, regime, u, 1.0, 1.0).log_value -
                 predict_point(spec, regime, u, 1.0).log_value);
  o.detail << "log(bound/point) " << fmt(lr[0]) << ", " << fmt(lr[1]) << ", " << fmt(lr[2]);
  o.require(lr[0] < 0 && lr[1] < lr[0] && lr[2] < lr[1], "monotone decrease");
  o.require(lr[2] < std::log(1e-10), "ratio near zero at u=1e4");
  return o;
}

// 9. Same seed, different worker counts, identical files.
Outcome determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gstorage_acceptance";
  fs::create_directories(dir);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  bool same = true;
  for (const char* w : {"1", "2", "5"}) {
    std::ostringstream out, err;
    const std::string prefix = (dir / (std::string("w") + w)).string();
    const int code = cli::run_cli({"compare", "--family", "fbm", "--hurst", "0.75", "--delta", "0.1", "--T", "1",
                                   "--u", "1,2,4", "--reps", "20000", "--seed", "9", "--workers", w, "--output",
                                   prefix},
                                  {out, err});
    o.require(code == 0, std::string("compare exit code with ") + w + " workers: " + err.str());
    if (std::string(w) != "1") {
      same = same && slurp(prefix + ".csv") == slurp((dir / "w1").string() + ".csv") &&
             slurp(prefix + ".json") == slurp((dir / "w1").string() + ".json");
    }
  }
  o.detail << "compare with 1, 2 and 5 workers: " << (same ? "bit-identical" : "outputs differ");
  o.require(same, "bit-identical CSV/JSON");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"storage brute force", brute_force},
      {"Brownian exactness", brownian},
      {"closed-form identities", identities},
      {"window multiplicity", multiplicity},
      {"Pickands suite", pickands},
      {"single-sum law", single_sum_law},
      {"ordering and inf/sup trend", ordering_trend},
      {"inf bound dominance", prop1},
      {"determinism", determinism}};
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    report(id, criteria[i].first, o, seconds_since(t0));
    failed += !o.pass;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " failing criteria" << std::endl;
  return failed ? 1 : 0;
}
