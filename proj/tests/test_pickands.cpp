#include <cmath>

#include <gtest/gtest.h>

#include <gstorage/normal.hpp>
#include <gstorage/pickands.hpp>

using namespace gstorage;

namespace {

// Discrete Brownian Pickands constant from the random-walk ladder identity:
// H^delta = delta^{-1} exp(-2 sum_k Psi(sqrt(k delta / 2)) / k).
double discrete_bm_pickands(double delta) {
  double s = 0.0;
  for (long k = 1;; ++k) {
    const double term = normal_survival(std::sqrt(k * delta / 2.0)) / static_cast<double>(k);
    s += term;
    if (term < 1e-18) break;
  }
  return std::exp(-2.0 * s) / delta;
}

}  // namespace

TEST(PickandsOracle, SpitzerSeries) {
  EXPECT_NEAR(discrete_bm_pickands(0.01), 0.92092, 5e-5);
  EXPECT_NEAR(discrete_bm_pickands(0.002), 0.96382, 5e-5);
}

TEST(FieldSampler, GridAndDenseRoutes) {
  const auto xi = fbm_variance(0.5);
  const FieldSampler grid(xi, grid_window(1.0, 0.25));
  EXPECT_TRUE(grid.uses_grid());
  EXPECT_NEAR(grid.lag_variance(0, 4), 1.0, 1e-15);
  const FieldSampler loose(xi, {0.0, 0.3, 1.1});
  EXPECT_FALSE(loose.uses_grid());
  EXPECT_NEAR(loose.lag_variance(1, 2), 0.8, 1e-15);
  // empirical variance of the last coordinate
  auto ws = loose.make_workspace();
  std::vector<double> x;
  double s2 = 0.0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    RngStream rng(4, i);
    loose.sample(rng, ws, x);
    s2 += x[2] * x[2];
  }
  EXPECT_NEAR(s2 / reps, 1.1, 5.0 * 1.1 * std::sqrt(2.0 / reps));
}

TEST(PickandsWindow, TwoPointOracles) {
  const auto xi = fbm_variance(0.5);
  for (double s : {0.5, 2.0}) {
    const double H = 2.0 * normal_cdf(std::sqrt(s / 2.0));
    const double G = 2.0 * normal_survival(std::sqrt(s / 2.0));
    for (auto est : {WindowEstimator::crude, WindowEstimator::tilted}) {
      PickandsOptions opt;
      opt.estimator = est;
      const auto h = estimate_H_window(xi, {0.0, s}, 40000, 17, opt);
      const auto g = estimate_G_window(xi, {0.0, s}, 40000, 18, opt);
      EXPECT_NEAR(h.value, H, 4.0 * h.std_error) << s;
      EXPECT_NEAR(g.value, G, 4.0 * g.std_error) << s;
      EXPECT_EQ(h.kind, PickandsKind::H_window);
      EXPECT_EQ(g.kind, PickandsKind::G_window);
    }
  }
}

TEST(PickandsWindow, SinglePointIsOne) {
  const auto e = estimate_H_window(fbm_variance(0.7), {0.0}, 100, 1);
  EXPECT_DOUBLE_EQ(e.value, 1.0);
  EXPECT_DOUBLE_EQ(e.std_error, 0.0);
}

TEST(PickandsWindow, EstimatorsAgreeOnLongerWindow) {
  const auto xi = fbm_variance(0.5);
  PickandsOptions crude, tilted;
  tilted.estimator = WindowEstimator::tilted;
  const auto a = estimate_H_window(xi, grid_window(2.0, 0.01), 20000, 3, crude);
  const auto b = estimate_H_window(xi, grid_window(2.0, 0.01), 20000, 4, tilted);
  EXPECT_NEAR(a.value, b.value, 4.0 * std::hypot(a.std_error, b.std_error));
  EXPECT_LT(b.std_error, a.std_error);
  // independent Lindley-recursion value of H([0,2]_{0.01}) for Brownian motion
  EXPECT_NEAR(b.value, 3.550, 4.0 * b.std_error + 5e-3);
}

TEST(PickandsWindow, GIsBelowOneAndHAboveOne) {
  const auto xi = fbm_variance(0.3);
  const auto h = estimate_H_window(xi, grid_window(1.0, 0.1), 5000, 9);
  const auto g = estimate_G_window(xi, grid_window(1.0, 0.1), 5000, 9);
  EXPECT_GT(h.value, 1.0);
  EXPECT_LT(g.value, 1.0);
  EXPECT_GT(g.value, 0.0);
}

TEST(PickandsWindow, WorkerCountDoesNotChangeResult) {
  const auto xi = fbm_variance(0.6);
  PickandsOptions one, three;
  one.estimator = three.estimator = WindowEstimator::tilted;
  three.workers = 3;
  const auto a = estimate_H_window(xi, grid_window(3.0, 0.1), 3001, 5, one);
  const auto b = estimate_H_window(xi, grid_window(3.0, 0.1), 3001, 5, three);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(PickandsRate, BrownianDiscreteConstant) {
  const auto e = estimate_H_rate(fbm_variance(0.5), 0.01, {}, 20000, 21);
  EXPECT_EQ(e.kind, PickandsKind::H_rate);
  ASSERT_EQ(e.trace.size(), 5u);
  EXPECT_EQ(e.slopes.size(), 4u);
  EXPECT_NEAR(e.value, discrete_bm_pickands(0.01), 3.0 * e.std_error);
  // H/S falls towards the rate from above
  for (std::size_t i = 1; i < e.trace.size(); ++i) EXPECT_LT(e.trace[i].H_over_S, e.trace[i - 1].H_over_S);
}

TEST(PickandsRate, InputValidation) {
  const auto xi = fbm_variance(0.5);
  EXPECT_THROW(estimate_H_rate(xi, 0.1, {1.0, 2.0}, 10, 1), ConfigError);
  EXPECT_THROW(estimate_H_rate(xi, 0.1, {1.0, 2.05, 3.0}, 10, 1), ConfigError);
  EXPECT_THROW(estimate_H_rate(xi, 0.1, {2.0, 1.0, 3.0}, 10, 1), ConfigError);
  EXPECT_THROW(estimate_H_window(xi, {0.0, 1.0}, 1, 1), ConfigError);
  EXPECT_EQ(default_S_grid(0.01), (std::vector<double>{2, 4, 6, 8, 10}));
  EXPECT_EQ(default_S_grid(2.0), (std::vector<double>{4, 8, 12, 16, 20}));
}
