#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>

#include <fftw3.h>

namespace gstorage::detail {

// FFTW's planner is not thread-safe; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwArray = std::unique_ptr<T[], FftwFree>;

inline FftwArray<double> fftw_real_array(std::size_t n) {
  return FftwArray<double>(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}

inline FftwArray<fftw_complex> fftw_complex_array(std::size_t n) {
  return FftwArray<fftw_complex>(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

/// Owned plan for a length-n real transform pair (r2c for eigenvalues, c2r
/// for synthesis). Plans are built with FFTW_ESTIMATE on scratch arrays and
/// executed through the new-array interface, so one plan serves all workers.
class RealFftPlan {
 public:
  explicit RealFftPlan(std::size_t n) : n_(n) {
    auto re = fftw_real_array(n);
    auto cx = fftw_complex_array(n / 2 + 1);
    std::lock_guard lock(fftw_planner_mutex());
    r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.get(), cx.get(), FFTW_ESTIMATE);
    c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cx.get(), re.get(), FFTW_ESTIMATE);
  }
  ~RealFftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    if (r2c_) fftw_destroy_plan(r2c_);
    if (c2r_) fftw_destroy_plan(c2r_);
  }
  RealFftPlan(const RealFftPlan&) = delete;
  RealFftPlan& operator=(const RealFftPlan&) = delete;

  std::size_t size() const noexcept { return n_; }
  void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(r2c_, in, out); }
  /// Unnormalized inverse; destroys `in`.
  void backward(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(c2r_, in, out); }

 private:
  std::size_t n_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

}  // namespace gstorage::detail
