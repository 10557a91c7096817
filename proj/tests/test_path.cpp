#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include <gstorage/path.hpp>

using namespace gstorage;

namespace {

struct Moments {
  double var_end;
  double cov_mid_end;
};

// Sample second moments of X(n delta) and X(n delta / 2) over `reps` paths.
Moments sample_moments(const PathSimulator& sim, std::size_t reps, std::uint64_t seed) {
  auto ws = sim.make_workspace();
  std::vector<double> x, d;
  const std::size_t n = sim.grid().horizon_n;
  double s2 = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    RngStream rng(seed, i);
    sim.simulate_into(rng, ws, x, d);
    s2 += x[n] * x[n];
    sc += x[n] * x[n / 2];
  }
  return {s2 / reps, sc / reps};
}

void expect_moments(const VarianceFunction& v, double delta, std::size_t n, SynthesisOptions opt = {}) {
  const PathSimulator sim(v, 0.0, GridSpec{delta, n}, opt);
  const std::size_t reps = 20000;
  const auto m = sample_moments(sim, reps, 99);
  const double t = delta * n, h = delta * (n / 2);
  const double var = v(t);
  const double cov = 0.5 * (v(t) + v(h) - v(t - h));
  // sample second moments of Gaussians: SE ~ var sqrt(2/reps)
  EXPECT_NEAR(m.var_end / var, 1.0, 5.0 * std::sqrt(2.0 / reps));
  EXPECT_NEAR(m.cov_mid_end / cov, 1.0, 6.0 * std::sqrt(2.0 / reps) * var / cov);
}

}  // namespace

TEST(Grid, Validation) {
  EXPECT_THROW(GridSpec({0.0, 10}).validate(), ConfigError);
  EXPECT_THROW(GridSpec({0.1, 0}).validate(), ConfigError);
  EXPECT_NEAR(GridSpec({0.1, 30}).horizon_time(), 3.0, 1e-12);
}

TEST(Synthesis, MethodSelection) {
  EXPECT_EQ(IncrementSampler(fbm_variance(0.5), 0.001, 20000).method(), SynthesisMethod::white);
  const IncrementSampler f(fbm_variance(0.75), 0.1, 1000);
  EXPECT_EQ(f.method(), SynthesisMethod::circulant);
  EXPECT_EQ(f.embedding_size(), 2048u);
  EXPECT_GE(f.min_eigenvalue_ratio(), -1e-12);
  SynthesisOptions dense;
  dense.force_dense = true;
  EXPECT_EQ(IncrementSampler(fbm_variance(0.75), 0.1, 100, dense).method(), SynthesisMethod::dense);
}

TEST(Synthesis, BrownianMoments) { expect_moments(fbm_variance(0.5), 0.5, 8); }
TEST(Synthesis, FbmCirculantMoments) { expect_moments(fbm_variance(0.75), 0.25, 8); }
TEST(Synthesis, FbmRoughCirculantMoments) { expect_moments(fbm_variance(0.2), 1.0, 64); }

TEST(Synthesis, FbmDenseMoments) {
  SynthesisOptions dense;
  dense.force_dense = true;
  expect_moments(fbm_variance(0.75), 0.25, 8, dense);
}

TEST(Synthesis, IntegratedSrdMoments) {
  const auto spec = make_integrated_srd(exp_correlation(1.0), 1.0);
  expect_moments(spec.variance, 0.125, 8);  // sigma^2(1) = 2/e
  EXPECT_NEAR(spec.variance(1.0), 0.7357588823428847, 1e-12);
}

TEST(Synthesis, IntegratedSrdLongRunVariance) {
  const auto spec = make_integrated_srd(exp_correlation(1.0), 1.0);
  const PathSimulator sim(spec.variance, 0.0, GridSpec{0.5, 100});
  const std::size_t reps = 20000;
  const auto m = sample_moments(sim, reps, 5);
  // Var X(50) / 50 = 2 (1 - 1/50 + e^{-50}/50)
  EXPECT_NEAR(m.var_end / 50.0, 2.0 * (1.0 - 1.0 / 50.0), 5.0 * 2.0 * std::sqrt(2.0 / reps));
}

TEST(Synthesis, Determinism) {
  const PathSimulator sim(fbm_variance(0.7), 1.0, GridSpec{0.1, 300});
  const auto a = sim.simulate(RngStream(42, 3));
  const auto b = sim.simulate(RngStream(42, 3));
  const auto c = sim.simulate(RngStream(42, 4));
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values.size(), 301u);
  EXPECT_EQ(a.values[0], 0.0);
  for (std::size_t k = 0; k < a.values.size(); ++k)
    EXPECT_DOUBLE_EQ(a.drifted[k], a.values[k] - 0.1 * static_cast<double>(k));
}

TEST(Synthesis, PathCsv) {
  const auto p = simulate_fbm(0.5, 2.0, GridSpec{0.5, 2}, RngStream(1, 0));
  std::ostringstream os;
  write_path_csv(os, p);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("k,t,X,X_minus_ct\n0,0,0,0\n1,0.5,", 0), 0u) << s;
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}
