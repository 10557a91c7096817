#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "fft.hpp"
#include "format.hpp"
#include "process.hpp"
#include "rng.hpp"
#include "variance.hpp"

namespace gstorage {

/// The grid {0, delta, ..., horizon_n * delta}.
struct GridSpec {
  double delta;
  std::size_t horizon_n;

  double horizon_time() const { return delta * static_cast<double>(horizon_n); }
  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("grid step delta must be positive");
    if (horizon_n < 1) throw ConfigError("grid horizon must contain at least one step");
  }
};

/// One realization of X on the grid plus the drifted values X(k delta) - c k delta.
struct PathSample {
  std::vector<double> values;
  std::vector<double> drifted;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  GridSpec grid{1.0, 1};
};

enum class SynthesisMethod { white, circulant, dense };

inline const char* to_string(SynthesisMethod m) {
  switch (m) {
    case SynthesisMethod::white: return "white";
    case SynthesisMethod::circulant: return "circulant";
    case SynthesisMethod::dense: return "dense";
  }
  return "?";
}

struct SynthesisOptions {
  double clip_tolerance = 1e-8;    // relative size of clippable negative eigenvalues
  int max_embedding_doublings = 2;
  std::size_t max_dense = 4096;    // largest dense fallback
  bool force_dense = false;
};

/// Exact sampler for n consecutive stationary Gaussian increments with
/// autocovariance gamma(k) taken from a variance function. Uses circulant
/// embedding (Davies-Harte) with a dense Cholesky fallback; increments with
/// zero correlation are drawn directly.
///
/// Immutable after construction. Each worker owns a Workspace.
class IncrementSampler {
 public:
  struct Workspace {
    detail::FftwArray<fftw_complex> spectrum;
    detail::FftwArray<double> signal;
    std::vector<double> normals;
  };

  IncrementSampler(const VarianceFunction& variance, double delta, std::size_t n,
                   const SynthesisOptions& opt = {})
      : n_(n) {
    if (n < 1) throw ConfigError("sampler needs at least one increment");
    if (!(delta > 0.0)) throw ConfigError("grid step delta must be positive");
    gamma0_ = variance(delta);
    if (!(gamma0_ > 0.0)) throw ConfigError("variance function must be positive for t > 0");

    const auto head = increment_autocovariance(variance, delta, std::min<std::size_t>(n, 64));
    bool white = !opt.force_dense;
    // Round-off in the second difference scales with sigma^2((k+1) delta).
    auto negligible = [&](double g, std::size_t k) {
      return std::abs(g) <= 1e-12 * variance(static_cast<double>(k + 1) * delta);
    };
    for (std::size_t k = 1; k < head.size() && white; ++k) white = negligible(head[k], k);
    if (white && n > head.size()) {
      const auto full = increment_autocovariance(variance, delta, n);
      for (std::size_t k = head.size(); k < n && white; ++k) white = negligible(full[k], k);
    }
    if (white) {
      method_ = SynthesisMethod::white;
      return;
    }
    std::string why = "forced dense";
    if (!opt.force_dense) {
      std::size_t m = std::bit_ceil(std::max<std::size_t>(n, 2));
      for (int attempt = 0; attempt <= opt.max_embedding_doublings; ++attempt, m *= 2) {
        if (try_circulant(variance, delta, m, opt.clip_tolerance, why)) {
          method_ = SynthesisMethod::circulant;
          return;
        }
      }
    }
    if (n > opt.max_dense)
      throw NumericalError("path synthesis failed: circulant embedding rejected (" + why +
                           ") and " + std::to_string(n) + " increments exceed the dense limit");
    build_dense(variance, delta, why);
    method_ = SynthesisMethod::dense;
  }

  SynthesisMethod method() const noexcept { return method_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept { return plan_ ? plan_->size() : 0; }
  double min_eigenvalue_ratio() const noexcept { return min_eig_ratio_; }

  Workspace make_workspace() const {
    Workspace ws;
    if (method_ == SynthesisMethod::circulant) {
      ws.spectrum = detail::fftw_complex_array(plan_->size() / 2 + 1);
      ws.signal = detail::fftw_real_array(plan_->size());
    } else if (method_ == SynthesisMethod::dense) {
      ws.normals.resize(n_);
    }
    return ws;
  }

  /// Writes n increments into out.
  void sample(RngStream& rng, Workspace& ws, std::span<double> out) const {
    if (out.size() != n_) throw ConfigError("increment buffer has the wrong length");
    switch (method_) {
      case SynthesisMethod::white: {
        const double sd = std::sqrt(gamma0_);
        for (double& x : out) x = sd * rng.normal();
        return;
      }
      case SynthesisMethod::circulant: {
        const std::size_t big = plan_->size();
        const std::size_t half = big / 2;
        fftw_complex* spec = ws.spectrum.get();
        spec[0][0] = amp_[0] * rng.normal();
        spec[0][1] = 0.0;
        for (std::size_t k = 1; k < half; ++k) {
          spec[k][0] = amp_[k] * rng.normal();
          spec[k][1] = amp_[k] * rng.normal();
        }
        spec[half][0] = amp_[half] * rng.normal();
        spec[half][1] = 0.0;
        plan_->backward(spec, ws.signal.get());
        std::copy_n(ws.signal.get(), n_, out.begin());
        return;
      }
      case SynthesisMethod::dense: {
        for (double& z : ws.normals) z = rng.normal();
        Eigen::Map<const Eigen::VectorXd> z(ws.normals.data(), static_cast<Eigen::Index>(n_));
        Eigen::Map<Eigen::VectorXd> x(out.data(), static_cast<Eigen::Index>(n_));
        x.noalias() = factor_ * z;
        return;
      }
    }
  }

 private:
  bool try_circulant(const VarianceFunction& variance, double delta, std::size_t m, double clip,
                     std::string& why) {
    const std::size_t big = 2 * m;
    const auto g = increment_autocovariance(variance, delta, m + 1);
    auto plan = std::make_shared<detail::RealFftPlan>(big);
    auto row = detail::fftw_real_array(big);
    auto eig = detail::fftw_complex_array(m + 1);
    for (std::size_t j = 0; j <= m; ++j) row[j] = g[j];
    for (std::size_t j = 1; j < m; ++j) row[big - j] = g[j];
    plan->forward(row.get(), eig.get());
    double hi = 0.0;
    double lo = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      hi = std::max(hi, eig[k][0]);
      lo = std::min(lo, eig[k][0]);
    }
    min_eig_ratio_ = hi > 0.0 ? lo / hi : -1.0;
    if (!(hi > 0.0) || lo < -clip * hi) {
      why = "negative eigenvalue ratio " + std::to_string(min_eig_ratio_) +
            " at embedding size " + std::to_string(big);
      return false;
    }
    // Hermitian half-spectrum amplitudes: the end points are real, the
    // interior carries complex normals with variance lambda/2 per part.
    amp_.assign(m + 1, 0.0);
    const double norm = 1.0 / static_cast<double>(big);
    for (std::size_t k = 0; k <= m; ++k) {
      const double lam = std::max(eig[k][0], 0.0);
      const bool edge = (k == 0 || k == m);
      amp_[k] = std::sqrt(lam * norm * (edge ? 1.0 : 0.5));
    }
    plan_ = std::move(plan);
    return true;
  }

  void build_dense(const VarianceFunction& variance, double delta, const std::string& why) {
    const auto g = increment_autocovariance(variance, delta, n_);
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k) cov(j, k) = g[static_cast<std::size_t>(std::abs(j - k))];
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const double hi = es.eigenvalues().maxCoeff();
    const double lo = es.eigenvalues().minCoeff();
    if (es.info() != Eigen::Success || !(hi > 0.0) || lo < -1e-10 * hi)
      throw NumericalError("path synthesis failed: " + why +
                           "; dense factorization found eigenvalue " + std::to_string(lo));
    factor_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  std::size_t n_;
  double gamma0_ = 0.0;
  SynthesisMethod method_ = SynthesisMethod::white;
  std::shared_ptr<const detail::RealFftPlan> plan_;
  std::vector<double> amp_;
  Eigen::MatrixXd factor_;
  double min_eig_ratio_ = 0.0;
};

/// Draws paths of X on a fixed grid; shareable across workers.
class PathSimulator {
 public:
  PathSimulator(const VarianceFunction& variance, double drift_c, GridSpec grid,
                const SynthesisOptions& opt = {})
      : grid_((grid.validate(), grid)), drift_c_(drift_c), sampler_(variance, grid.delta, grid.horizon_n, opt) {}

  const GridSpec& grid() const noexcept { return grid_; }
  double drift() const noexcept { return drift_c_; }
  const IncrementSampler& sampler() const noexcept { return sampler_; }

  struct Workspace {
    IncrementSampler::Workspace sampler;
    std::vector<double> increments;
  };
  Workspace make_workspace() const {
    return Workspace{sampler_.make_workspace(), std::vector<double>(grid_.horizon_n)};
  }

  /// Fills values (X) and drifted (X - ct), each of length horizon_n + 1.
  void simulate_into(RngStream& rng, Workspace& ws, std::vector<double>& values,
                     std::vector<double>& drifted) const {
    const std::size_t n = grid_.horizon_n;
    sampler_.sample(rng, ws.sampler, ws.increments);
    values.resize(n + 1);
    drifted.resize(n + 1);
    values[0] = 0.0;
    drifted[0] = 0.0;
    double x = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      x += ws.increments[k - 1];
      values[k] = x;
      drifted[k] = x - drift_c_ * static_cast<double>(k) * grid_.delta;
    }
  }

  PathSample simulate(RngStream rng) const {
    auto ws = make_workspace();
    PathSample p;
    p.seed = rng.root_seed();
    p.stream = rng.stream_id();
    p.grid = grid_;
    simulate_into(rng, ws, p.values, p.drifted);
    return p;
  }

 private:
  GridSpec grid_;
  double drift_c_;
  IncrementSampler sampler_;
};

inline PathSample simulate_fbm(double hurst, double drift_c, GridSpec grid, RngStream rng) {
  return PathSimulator(fbm_variance(hurst), drift_c, grid).simulate(rng);
}

inline PathSample simulate_process(const ProcessSpec& spec, GridSpec grid, RngStream rng) {
  return PathSimulator(spec.variance, spec.drift_c, grid).simulate(rng);
}

/// Integrated input Z(t) = int_0^t zeta with correlation R (short-range).
inline PathSample simulate_integrated(const Correlation& corr, double drift_c, GridSpec grid,
                                      RngStream rng) {
  return simulate_process(make_integrated_srd(corr, drift_c), grid, rng);
}

/// CSV with header k,t,X,X_minus_ct.
inline void write_path_csv(std::ostream& os, const PathSample& p) {
  os << "k,t,X,X_minus_ct\n";
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    os << k << ',' << format_double(static_cast<double>(k) * p.grid.delta) << ','
       << format_double(p.values[k]) << ',' << format_double(p.drifted[k]) << '\n';
  }
}

}  // namespace gstorage
