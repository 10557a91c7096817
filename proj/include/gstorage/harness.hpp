#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "horizon.hpp"
#include "parallel.hpp"
#include "path.hpp"
#include "process.hpp"
#include "rng.hpp"
#include "storage.hpp"

namespace gstorage {

struct ExperimentConfig {
  ProcessSpec spec;
  double delta = 0.1;
  double T = 0.0;
  std::vector<double> u_list;
  std::size_t reps = 10000;
  std::uint64_t root_seed = 1;
  HorizonOptions horizon;
  std::size_t horizon_n = 0;  // fixed number of steps; 0 sizes the grid from the largest u
  std::size_t workers = 1;
  PickandsConstants constants;
};

/// Monte Carlo probability with a 95% normal-approximation interval; with
/// zero exceedances the upper end falls back to the rule of three.
struct EstimateWithCI {
  double p_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t reps = 0;
  std::size_t exceed_count = 0;
  std::size_t truncated_exceed_count = 0;
};

inline EstimateWithCI make_estimate(std::size_t exceed, std::size_t truncated, std::size_t reps) {
  EstimateWithCI e;
  e.reps = reps;
  e.exceed_count = exceed;
  e.truncated_exceed_count = truncated;
  const double n = static_cast<double>(reps);
  e.p_hat = static_cast<double>(exceed) / n;
  e.se = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  if (exceed == 0) {
    e.ci_lo = 0.0;
    e.ci_hi = std::min(1.0, 3.0 / n);
  } else {
    e.ci_lo = std::clamp(e.p_hat - 1.959963984540054 * e.se, 0.0, 1.0);
    e.ci_hi = std::clamp(e.p_hat + 1.959963984540054 * e.se, 0.0, 1.0);
  }
  return e;
}

enum class ProbabilityKind { point, sup, inf };

inline const char* to_string(ProbabilityKind k) {
  switch (k) {
    case ProbabilityKind::point: return "point";
    case ProbabilityKind::sup: return "sup";
    case ProbabilityKind::inf: return "inf";
  }
  return "?";
}

inline constexpr std::array<ProbabilityKind, 3> all_probability_kinds{
    ProbabilityKind::point, ProbabilityKind::sup, ProbabilityKind::inf};

struct ComparisonEntry {
  EstimateWithCI mc;
  std::optional<AsymptoticApproximation> asy;
  std::string asy_error;  // why asy is missing
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

struct ComparisonRow {
  double u = 0.0;
  std::array<ComparisonEntry, 3> entries;  // indexed by ProbabilityKind

  const ComparisonEntry& at(ProbabilityKind k) const { return entries[static_cast<std::size_t>(k)]; }
  ComparisonEntry& at(ProbabilityKind k) { return entries[static_cast<std::size_t>(k)]; }
};

struct ExperimentResult {
  std::vector<ComparisonRow> rows;
  GridSpec grid{1.0, 1};
  RegimeClass regime{};
  SynthesisMethod method = SynthesisMethod::white;
  double window_T = 0.0;
  std::size_t reps = 0;
  std::uint64_t root_seed = 0;
  std::size_t truncated_paths = 0;
  std::size_t ordering_violations = 0;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.reps < 1) throw ConfigError("reps must be >= 1");
  if (cfg.u_list.empty()) throw ConfigError("u list must not be empty");
  for (std::size_t i = 0; i < cfg.u_list.size(); ++i) {
    if (!(cfg.u_list[i] >= 0.0)) throw ConfigError("levels u must be >= 0");
    if (i && !(cfg.u_list[i] > cfg.u_list[i - 1])) throw ConfigError("levels u must increase");
  }
  if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(cfg.T >= 0.0)) throw ConfigError("T must be >= 0");
}

/// Coupled Monte Carlo for P(Q(0) > u), P(sup Q > u), P(inf Q > u): every
/// replication draws one path on a horizon sized for the largest u, and that
/// path serves all levels and all three statistics.
inline ExperimentResult estimate_probabilities(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentResult res;
  res.regime = classify_regime(cfg.spec);
  const std::size_t window = window_steps(cfg.T, cfg.delta);
  if (cfg.horizon_n > 0) {
    if (cfg.horizon_n <= window) throw ConfigError("window exceeds horizon: horizon_n must exceed T/delta");
    res.grid = GridSpec{cfg.delta, cfg.horizon_n};
  } else {
    res.grid = required_horizon(cfg.spec, res.regime, cfg.u_list.back(), cfg.delta, cfg.T, cfg.horizon);
  }
  res.reps = cfg.reps;
  res.root_seed = cfg.root_seed;
  res.window_T = static_cast<double>(window) * cfg.delta;
  const PathSimulator sim(cfg.spec.variance, cfg.spec.drift_c, res.grid);
  res.method = sim.sampler().method();

  std::vector<StorageResult> per_rep(cfg.reps);
  struct State {
    PathSimulator::Workspace ws;
    std::vector<double> values, drifted;
  };
  for_each_replication(
      cfg.reps, cfg.workers, [&] { return State{sim.make_workspace(), {}, {}}; },
      [&](State& st, std::size_t i) {
        RngStream rng(cfg.root_seed, i);
        sim.simulate_into(rng, st.ws, st.values, st.drifted);
        per_rep[i] = storage_window(st.drifted, window);
      });

  const std::size_t nu = cfg.u_list.size();
  std::vector<std::array<std::size_t, 6>> counts(nu, std::array<std::size_t, 6>{});
  for (const auto& r : per_rep) {
    if (r.truncation_flag) ++res.truncated_paths;
    if (!(r.inf_window <= r.q0 && r.q0 <= r.sup_window)) ++res.ordering_violations;
    const std::array<double, 3> stat{r.q0, r.sup_window, r.inf_window};
    for (std::size_t k = 0; k < nu; ++k)
      for (std::size_t s = 0; s < 3; ++s)
        if (stat[s] > cfg.u_list[k]) {
          ++counts[k][s];
          if (r.truncation_flag) ++counts[k][3 + s];
        }
  }

  for (std::size_t k = 0; k < nu; ++k) {
    ComparisonRow row;
    row.u = cfg.u_list[k];
    for (std::size_t s = 0; s < 3; ++s) {
      auto& e = row.entries[s];
      e.mc = make_estimate(counts[k][s], counts[k][3 + s], cfg.reps);
      try {
        switch (static_cast<ProbabilityKind>(s)) {
          case ProbabilityKind::point:
            e.asy = predict_point(cfg.spec, res.regime, row.u, cfg.delta, cfg.constants);
            break;
          case ProbabilityKind::sup:
            e.asy = predict_sup(cfg.spec, res.regime, row.u, cfg.T, cfg.delta, cfg.constants);
            break;
          case ProbabilityKind::inf:
            e.asy = predict_inf(cfg.spec, res.regime, row.u, cfg.T, cfg.delta, cfg.constants);
            break;
        }
        if (e.asy->value > 0.0) e.ratio = e.mc.p_hat / e.asy->value;
      } catch (const std::exception& ex) {
        e.asy.reset();
        e.asy_error = ex.what();
      }
    }
    res.rows.push_back(std::move(row));
  }
  return res;
}

struct TrendPoint {
  double u;
  double ratio;
  double ratio_lo;
  double ratio_hi;
  double ratio_se;
};

struct TrendReport {
  ProbabilityKind kind;
  std::vector<TrendPoint> points;
  bool drift_flag = false;  // ratio moving away from 1 as u grows
};

/// MC / asymptotic ratio per level; flags |last - 1| > |first - 1| + 2 se(last).
inline TrendReport ratio_trend(const ExperimentResult& res, ProbabilityKind kind) {
  if (res.rows.size() < 3) throw ConfigError("ratio_trend needs at least three levels");
  TrendReport rep{kind, {}, false};
  for (const auto& row : res.rows) {
    const auto& e = row.at(kind);
    if (!e.asy || !(e.asy->value > 0.0)) continue;
    const double a = e.asy->value;
    rep.points.push_back({row.u, e.mc.p_hat / a, e.mc.ci_lo / a, e.mc.ci_hi / a, e.mc.se / a});
  }
  if (rep.points.size() >= 2) {
    const auto& first = rep.points.front();
    const auto& last = rep.points.back();
    rep.drift_flag = std::abs(last.ratio - 1.0) > std::abs(first.ratio - 1.0) + 2.0 * last.ratio_se;
  }
  return rep;
}

inline TrendReport ratio_trend(const ExperimentConfig& cfg, ProbabilityKind kind) {
  return ratio_trend(estimate_probabilities(cfg), kind);
}

namespace detail {

inline std::vector<std::string> entry_flags(const ComparisonEntry& e) {
  std::vector<std::string> flags;
  if (e.asy) flags = e.asy->flags;
  else flags.push_back("asy_unavailable");
  if (e.mc.exceed_count == 0) flags.push_back("zero_exceedances");
  if (e.mc.truncated_exceed_count > 0) flags.push_back("truncated_exceedances");
  return flags;
}

}  // namespace detail

inline const char* comparison_csv_header() {
  return "u,kind,p_hat,se,ci_lo,ci_hi,asy_value,ratio,flags,exceed_count,truncated_exceed_count,reps\n";
}

inline void write_comparison_csv(std::ostream& os, const ExperimentResult& res) {
  os << comparison_csv_header();
  for (const auto& row : res.rows)
    for (auto kind : all_probability_kinds) {
      const auto& e = row.at(kind);
      os << csv_row({format_double(row.u), to_string(kind), format_double(e.mc.p_hat),
                     format_double(e.mc.se), format_double(e.mc.ci_lo), format_double(e.mc.ci_hi),
                     e.asy ? format_double(e.asy->value) : "nan", format_double(e.ratio),
                     join(detail::entry_flags(e), ";"), std::to_string(e.mc.exceed_count),
                     std::to_string(e.mc.truncated_exceed_count), std::to_string(e.mc.reps)});
    }
}

inline nlohmann::ordered_json to_json(const ExperimentResult& res) {
  nlohmann::ordered_json meta;
  meta["regime"] = to_string(res.regime.regime);
  meta["alpha"] = res.regime.alpha;
  meta["phi"] = format_double(res.regime.phi);
  meta["delta"] = res.grid.delta;
  meta["horizon_n"] = res.grid.horizon_n;
  meta["horizon_time"] = res.grid.horizon_time();
  meta["T"] = res.window_T;
  meta["reps"] = res.reps;
  meta["seed"] = res.root_seed;
  meta["synthesis"] = to_string(res.method);
  meta["truncated_paths"] = res.truncated_paths;
  meta["ordering_violations"] = res.ordering_violations;
  meta["ci_method"] = "normal approximation, rule of three at zero counts";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : res.rows)
    for (auto kind : all_probability_kinds) {
      const auto& e = row.at(kind);
      nlohmann::ordered_json j;
      j["u"] = row.u;
      j["kind"] = to_string(kind);
      j["p_hat"] = e.mc.p_hat;
      j["se"] = e.mc.se;
      j["ci_lo"] = e.mc.ci_lo;
      j["ci_hi"] = e.mc.ci_hi;
      j["asy_value"] = e.asy ? nlohmann::ordered_json(e.asy->value) : nlohmann::ordered_json(nullptr);
      j["ratio"] = std::isfinite(e.ratio) ? nlohmann::ordered_json(e.ratio) : nlohmann::ordered_json(nullptr);
      j["flags"] = detail::entry_flags(e);
      rows.push_back(std::move(j));
    }
  nlohmann::ordered_json out;
  out["metadata"] = std::move(meta);
  out["rows"] = std::move(rows);
  return out;
}

}  // namespace gstorage
