#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "normal.hpp"
#include "parallel.hpp"
#include "path.hpp"
#include "rng.hpp"
#include "storage.hpp"
#include "variance.hpp"

namespace gstorage {

/// Samples a centered Gaussian process xi with stationary increments and
/// xi(0) = 0 on a finite set of times M. Equally spaced sets starting at 0
/// go through the increment sampler; anything else is factorized densely.
class FieldSampler {
 public:
  FieldSampler(const VarianceFunction& xi, std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw ConfigError("the set M must not be empty");
    for (double t : times_)
      if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("times in M must be finite and >= 0");
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end()), times_.end());
    variance_.reserve(times_.size());
    for (double t : times_) variance_.push_back(xi(t));

    const std::size_t n = times_.size();
    if (n >= 2 && times_[0] == 0.0) {
      const double step = times_[1];
      bool grid = true;
      for (std::size_t i = 1; i < n && grid; ++i)
        grid = std::abs(times_[i] - step * static_cast<double>(i)) <= 1e-9 * step * static_cast<double>(i);
      if (grid) {
        path_.emplace(xi, 0.0, GridSpec{step, n - 1});
        lag_variance_.resize(n);
        for (std::size_t k = 0; k < n; ++k) lag_variance_[k] = xi(step * static_cast<double>(k));
        return;
      }
    }
    // Dense route; xi(0) = 0 points carry no randomness.
    for (std::size_t i = 0; i < n; ++i)
      if (variance_[i] > 0.0) random_.push_back(i);
    const auto r = static_cast<Eigen::Index>(random_.size());
    Eigen::MatrixXd cov(r, r);
    for (Eigen::Index a = 0; a < r; ++a)
      for (Eigen::Index b = 0; b < r; ++b) {
        const double s = times_[random_[a]], t = times_[random_[b]];
        cov(a, b) = 0.5 * (xi(s) + xi(t) - xi(s - t));
      }
    if (r > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        const double hi = es.eigenvalues().maxCoeff();
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-10 * hi)
          throw NumericalError("covariance factorization failed on M");
        factor_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
      }
    }
    pair_variance_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pair_variance_[i * n + j] = xi(times_[i] - times_[j]);
  }

  struct Workspace {
    std::optional<PathSimulator::Workspace> path;
    std::vector<double> drifted;
    std::vector<double> normals;
  };

  Workspace make_workspace() const {
    Workspace ws;
    if (path_) ws.path.emplace(path_->make_workspace());
    ws.normals.resize(random_.size());
    return ws;
  }

  std::size_t size() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  /// Var xi(t_i).
  const std::vector<double>& variances() const noexcept { return variance_; }
  /// Var(xi(t_i) - xi(t_j)) = sigma^2(|t_i - t_j|).
  double lag_variance(std::size_t i, std::size_t j) const {
    if (path_) return lag_variance_[i > j ? i - j : j - i];
    return pair_variance_[i * times_.size() + j];
  }
  bool uses_grid() const noexcept { return path_.has_value(); }

  void sample(RngStream& rng, Workspace& ws, std::vector<double>& out) const {
    if (path_) {
      path_->simulate_into(rng, *ws.path, out, ws.drifted);
      return;
    }
    out.assign(times_.size(), 0.0);
    for (double& z : ws.normals) z = rng.normal();
    if (random_.empty()) return;
    Eigen::Map<const Eigen::VectorXd> z(ws.normals.data(), static_cast<Eigen::Index>(ws.normals.size()));
    const Eigen::VectorXd x = factor_ * z;
    for (std::size_t a = 0; a < random_.size(); ++a) out[random_[a]] = x(static_cast<Eigen::Index>(a));
  }

 private:
  std::vector<double> times_;
  std::vector<double> variance_;
  std::optional<PathSimulator> path_;
  std::vector<double> lag_variance_;
  std::vector<std::size_t> random_;
  Eigen::MatrixXd factor_;
  std::vector<double> pair_variance_;
};

enum class PickandsKind { H_window, G_window, H_rate };

inline const char* to_string(PickandsKind k) {
  switch (k) {
    case PickandsKind::H_window: return "H_window";
    case PickandsKind::G_window: return "G_window";
    case PickandsKind::H_rate: return "H_rate";
  }
  return "?";
}

/// Per-replication functional used for a window estimate.
///  crude:  sup (inf) over M of exp(sqrt2 xi(t) - Var xi(t)).
///  tilted: |M| exp(max (min) V - log sum exp V) with
///          V(t) = sqrt2 (xi(t) - xi(tau)) - Var(xi(t) - xi(tau)), tau uniform on M.
/// Both have expectation H_xi(M) (G_xi(M)); the tilted one is bounded by
/// |M| and keeps a finite variance on long windows where the crude sup is
/// dominated by rare paths.
enum class WindowEstimator { crude, tilted };

struct PickandsTracePoint {
  double S;
  double H;         // window estimate H_xi([0,S]_delta)
  double H_over_S;
  double se;        // of H_over_S
};

struct PickandsEstimate {
  PickandsKind kind = PickandsKind::H_window;
  double value = 0.0;
  double std_error = 0.0;
  double S = 0.0;
  double delta = 0.0;
  std::size_t reps = 0;
  std::string process_tag;
  WindowEstimator estimator = WindowEstimator::crude;
  std::vector<PickandsTracePoint> trace;  // H_rate only
  std::vector<double> slopes;             // H_rate only
};

struct PickandsOptions {
  WindowEstimator estimator = WindowEstimator::crude;
  std::size_t workers = 1;
  std::uint64_t stream_tag = 0;
  std::string process_tag = "xi";
};

namespace detail {

inline double window_functional(const FieldSampler& f, const std::vector<double>& x, bool sup,
                                WindowEstimator est, RngStream& rng) {
  const std::size_t n = f.size();
  const auto& var = f.variances();
  if (est == WindowEstimator::crude) {
    double best = sup ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::numbers::sqrt2 * x[i] - var[i];
      best = sup ? std::max(best, w) : std::min(best, w);
    }
    return std::exp(best);
  }
  const std::size_t tau = rng.index(n);
  double ext = sup ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  thread_local std::vector<double> v;
  v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::numbers::sqrt2 * (x[i] - x[tau]) - f.lag_variance(i, tau);
    ext = sup ? std::max(ext, v[i]) : std::min(ext, v[i]);
    hi = std::max(hi, v[i]);
  }
  double acc = 0.0;
  for (double vi : v) acc += std::exp(vi - hi);
  const double log_sum = hi + std::log(acc);
  return static_cast<double>(n) * std::exp(ext - log_sum);
}

inline PickandsEstimate estimate_window(const VarianceFunction& xi, std::vector<double> M,
                                        std::size_t reps, std::uint64_t seed, bool sup,
                                        const PickandsOptions& opt) {
  if (reps < 2) throw ConfigError("Pickands estimation needs at least two replications");
  const FieldSampler field(xi, std::move(M));
  std::vector<double> samples(reps);
  for_each_replication(
      reps, opt.workers,
      [&] { return std::pair{field.make_workspace(), std::vector<double>()}; },
      [&](auto& st, std::size_t i) {
        RngStream rng(seed, stream_id(opt.stream_tag, i));
        field.sample(rng, st.first, st.second);
        samples[i] = window_functional(field, st.second, sup, opt.estimator, rng);
      });
  const double mean = compensated_sum(samples) / static_cast<double>(reps);
  std::vector<double> sq(reps);
  for (std::size_t i = 0; i < reps; ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
  const double var = compensated_sum(sq) / static_cast<double>(reps - 1);
  PickandsEstimate e;
  e.kind = sup ? PickandsKind::H_window : PickandsKind::G_window;
  e.value = mean;
  e.std_error = std::sqrt(var / static_cast<double>(reps));
  e.S = field.times().back();
  e.delta = field.size() > 1 ? field.times()[1] - field.times()[0] : 0.0;
  e.reps = reps;
  e.process_tag = opt.process_tag;
  e.estimator = opt.estimator;
  return e;
}

}  // namespace detail

/// [0,S] intersected with delta Z.
inline std::vector<double> grid_window(double S, double delta) {
  if (!(delta > 0.0)) throw ConfigError("grid step delta must be positive");
  const std::size_t n = window_steps(S, delta);
  std::vector<double> M(n + 1);
  for (std::size_t k = 0; k <= n; ++k) M[k] = static_cast<double>(k) * delta;
  return M;
}

/// H_xi(M) = E sup_{t in M} exp(sqrt2 xi(t) - Var xi(t)).
inline PickandsEstimate estimate_H_window(const VarianceFunction& xi, std::vector<double> M,
                                          std::size_t reps, std::uint64_t seed,
                                          const PickandsOptions& opt = {}) {
  return detail::estimate_window(xi, std::move(M), reps, seed, true, opt);
}

/// G_xi(M) = E inf_{t in M} exp(sqrt2 xi(t) - Var xi(t)).
inline PickandsEstimate estimate_G_window(const VarianceFunction& xi, std::vector<double> M,
                                          std::size_t reps, std::uint64_t seed,
                                          const PickandsOptions& opt = {}) {
  return detail::estimate_window(xi, std::move(M), reps, seed, false, opt);
}

inline std::vector<double> default_S_grid(double delta) {
  const double unit = std::max(delta, 1.0);
  return {2 * unit, 4 * unit, 6 * unit, 8 * unit, 10 * unit};
}

/// Discrete Pickands constant H_xi^delta = lim H_xi([0,S]_delta)/S.
///
/// Each window is estimated independently with the tilted estimator. Since
/// H_xi([0,S]_delta) = H S + K + o(1), the plateau is read off the slope
/// between the two largest windows, which cancels the offset K that biases
/// H/S upward at finite S. Successive slopes that disagree by more than
/// 3 combined SE and 5% raise RateNotConverged.
inline PickandsEstimate estimate_H_rate(const VarianceFunction& xi, double delta,
                                        std::vector<double> S_grid, std::size_t reps,
                                        std::uint64_t seed, PickandsOptions opt = {}) {
  if (S_grid.empty()) S_grid = default_S_grid(delta);
  if (S_grid.size() < 3) throw ConfigError("H_rate needs at least three window lengths");
  for (std::size_t i = 0; i < S_grid.size(); ++i) {
    if (!(S_grid[i] > 0.0)) throw ConfigError("window lengths must be positive");
    if (i && !(S_grid[i] > S_grid[i - 1])) throw ConfigError("window lengths must increase");
    const double ratio = S_grid[i] / delta;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio)
      throw ConfigError("window lengths must be multiples of delta");
  }
  opt.estimator = WindowEstimator::tilted;
  PickandsEstimate out;
  out.kind = PickandsKind::H_rate;
  out.delta = delta;
  out.reps = reps;
  out.process_tag = opt.process_tag;
  out.estimator = WindowEstimator::tilted;
  std::vector<double> se;
  const std::uint64_t base_tag = opt.stream_tag;
  for (std::size_t i = 0; i < S_grid.size(); ++i) {
    opt.stream_tag = base_tag + i + 1;
    const auto w = estimate_H_window(xi, grid_window(S_grid[i], delta), reps, seed, opt);
    out.trace.push_back({w.S, w.value, w.value / w.S, w.std_error / w.S});
    se.push_back(w.std_error);
  }
  std::vector<double> slope_se;
  for (std::size_t i = 1; i < out.trace.size(); ++i) {
    const double dS = out.trace[i].S - out.trace[i - 1].S;
    out.slopes.push_back((out.trace[i].H - out.trace[i - 1].H) / dS);
    slope_se.push_back(std::hypot(se[i], se[i - 1]) / dS);
  }
  const std::size_t last = out.slopes.size() - 1;
  out.value = out.slopes[last];
  out.std_error = slope_se[last];
  out.S = out.trace.back().S;
  const double diff = std::abs(out.slopes[last] - out.slopes[last - 1]);
  const double combined = std::hypot(slope_se[last], slope_se[last - 1]);
  if (diff > 3.0 * combined && diff > 0.05 * std::abs(out.value)) {
    Trace t;
    for (const auto& p : out.trace) t.emplace_back(p.S, p.H_over_S);
    throw RateNotConverged("successive slopes " + std::to_string(out.slopes[last - 1]) + " and " +
                               std::to_string(out.slopes[last]) + " disagree",
                           std::move(t));
  }
  if (!(out.value > 0.0)) throw NumericalError("estimated Pickands rate is not positive");
  return out;
}

}  // namespace gstorage
