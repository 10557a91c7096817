#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include <nlohmann/json.hpp>

#include "errors.hpp"
#include "path.hpp"

namespace gstorage {

/// Q(0), and sup / inf of Q over the window [0,T] intersected with the grid.
struct StorageResult {
  double q0 = 0.0;
  double sup_window = 0.0;
  double inf_window = 0.0;
  double window_T = 0.0;
  bool truncation_flag = false;  // some running maximum sat on the last grid point
};

inline nlohmann::ordered_json to_json(const StorageResult& r) {
  nlohmann::ordered_json j;
  j["q0"] = r.q0;
  j["sup"] = r.sup_window;
  j["inf"] = r.inf_window;
  j["T"] = r.window_T;
  j["truncated"] = r.truncation_flag;
  return j;
}

/// Number of grid steps in [0,T]; a tiny slack absorbs T/delta round-off
/// so that T = 3 * 0.1 covers three steps.
inline std::size_t window_steps(double T, double delta) {
  if (!(T >= 0.0)) throw ConfigError("window length T must be >= 0");
  return static_cast<std::size_t>(std::floor(T / delta * (1.0 + 1e-12) + 1e-9));
}

/// Q(0) = max_k drifted[k] - drifted[0].
inline double storage_at_origin(std::span<const double> drifted) {
  if (drifted.empty()) throw ConfigError("storage_at_origin needs a nonempty path");
  return *std::max_element(drifted.begin(), drifted.end()) - drifted.front();
}

inline double storage_at_origin(const PathSample& path) { return storage_at_origin(path.drifted); }

/// Q(j delta) = max_{k >= j} drifted[k] - drifted[j] for j <= window, by one
/// backward running-maximum scan.
inline StorageResult storage_window(std::span<const double> drifted, std::size_t window) {
  if (drifted.empty()) throw ConfigError("storage_window needs a nonempty path");
  const std::size_t last = drifted.size() - 1;
  if (window >= drifted.size() || (window > 0 && window >= last))
    throw ConfigError("window exceeds horizon: window needs " + std::to_string(window) +
                      " steps but the path has " + std::to_string(last));
  double run = drifted[last];
  std::size_t arg = last;
  for (std::size_t k = last; k-- > window;) {
    if (drifted[k] > run) {
      run = drifted[k];
      arg = k;
    }
  }
  StorageResult r;
  r.truncation_flag = (arg == last);
  r.sup_window = run - drifted[window];
  r.inf_window = r.sup_window;
  for (std::size_t j = window + 1; j-- > 0;) {
    run = std::max(run, drifted[j]);
    const double q = run - drifted[j];
    r.sup_window = std::max(r.sup_window, q);
    r.inf_window = std::min(r.inf_window, q);
    if (j == 0) r.q0 = q;
  }
  return r;
}

inline StorageResult storage_window(const PathSample& path, double T) {
  const std::size_t w = window_steps(T, path.grid.delta);
  auto r = storage_window(path.drifted, w);
  r.window_T = static_cast<double>(w) * path.grid.delta;
  return r;
}

}  // namespace gstorage
