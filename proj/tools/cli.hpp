#pragma once

// Command-line front end shared by the gstorage binary and the CLI tests.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <gstorage/gstorage.hpp>

namespace gstorage::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3 };

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::ostream& open_or(std::ofstream& file, const std::string& path, std::ostream& fallback) {
  if (path.empty()) return fallback;
  file.open(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  return file;
}

inline PickandsConstants constants_from(const KeyValueConfig& cfg) {
  PickandsConstants k;
  if (cfg.has("H_delta")) k.discrete_rate = cfg.number("H_delta");
  if (cfg.has("H_continuous")) k.continuous_rate = cfg.number("H_continuous");
  if (cfg.has("H_window")) k.window_sup = cfg.number("H_window");
  if (cfg.has("G_window")) k.window_inf = cfg.number("G_window");
  return k;
}

inline std::string phi_text(double phi) { return format_double(phi); }

int cmd_classify(const KeyValueConfig& cfg, Streams io) {
  const auto spec = process_from_config(cfg);
  std::vector<double> probes;
  if (cfg.has("probes")) probes = cfg.numbers("probes");
  const auto r = classify_regime(spec, probes);
  nlohmann::ordered_json j;
  j["regime"] = to_string(r.regime);
  j["alpha"] = r.alpha;
  j["phi"] = std::isfinite(r.phi) ? nlohmann::ordered_json(r.phi) : nlohmann::ordered_json("inf");
  j["condition_B_ok"] = r.condition_B_ok;
  j["family"] = to_string(spec.family);
  io.out << j.dump() << "\n";
  return ok;
}

int cmd_simulate(const KeyValueConfig& cfg, Streams io) {
  const auto spec = process_from_config(cfg);
  const double delta = cfg.number("delta");
  GridSpec grid{delta, 0};
  if (cfg.has("horizon_n")) {
    grid.horizon_n = cfg.integer("horizon_n", 0);
  } else {
    const auto regime = classify_regime(spec);
    HorizonOptions h;
    h.safety = cfg.number("safety", h.safety);
    h.tail_eps = cfg.number("tail_eps", h.tail_eps);
    h.max_steps = cfg.integer("max_steps", h.max_steps);
    grid = required_horizon(spec, regime, cfg.numbers("u").back(), delta, cfg.number("T", 0.0), h);
  }
  const auto path = simulate_process(spec, grid, RngStream(cfg.integer("seed", 1), cfg.integer("stream", 0)));
  const std::string prefix = cfg.get("output", "");
  std::ofstream csv;
  write_path_csv(open_or(csv, prefix.empty() ? "" : prefix + ".csv", io.out), path);
  if (cfg.has("T")) {
    std::ofstream js;
    open_or(js, prefix.empty() ? "" : prefix + ".storage.json", io.err)
        << to_json(storage_window(path, cfg.number("T"))).dump() << "\n";
  }
  return ok;
}

int cmd_asympt(const KeyValueConfig& cfg, Streams io) {
  const auto spec = process_from_config(cfg);
  const auto regime = classify_regime(spec);
  const double delta = cfg.number("delta");
  const double T = cfg.number("T", 0.0);
  const auto k = constants_from(cfg);
  const std::string kind = cfg.get("kind", "point");
  std::vector<std::string> kinds;
  if (kind == "all") kinds = {"point", "sup", "inf"};
  else kinds = {kind};
  std::ofstream file;
  std::ostream& os = open_or(file, cfg.has("output") ? cfg.get("output", "") + ".csv" : "", io.out);
  os << "u,regime,t_u,m_u,Delta_u,f_u,psi_m,prefactor,value,kind,flags,log_value\n";
  for (double u : cfg.numbers("u")) {
    for (const auto& kd : kinds) {
      AsymptoticApproximation a;
      if (kd == "point") a = predict_point(spec, regime, u, delta, k);
      else if (kd == "sup") a = predict_sup(spec, regime, u, T, delta, k);
      else if (kd == "inf") a = predict_inf(spec, regime, u, T, delta, k);
      else if (kd == "prop1") a = predict_prop1_bound(spec, regime, u, T, delta);
      else throw ConfigError("unknown kind '" + kd + "' (expected point, sup, inf, prop1, all)");
      os << csv_row({format_double(u), to_string(a.regime), format_double(a.core.t_u),
                     format_double(a.core.m_u), format_double(a.core.delta_u_scale),
                     format_double(a.core.f_u), format_double(a.psi_m), format_double(a.prefactor),
                     format_double(a.value), to_string(a.kind), join(a.flags, ";"),
                     format_double(a.log_value)});
    }
  }
  return ok;
}

inline VarianceFunction xi_from_config(const KeyValueConfig& cfg, std::string& tag) {
  const auto spec = process_from_config(cfg);
  const std::string which = cfg.get("xi", "eta");
  VarianceFunction v = spec.variance;
  if (which == "eta") {
    const auto regime = classify_regime(spec);
    v = v.scaled(eta_variance_scale(spec, regime));
    tag = "eta";
  } else if (which == "process") {
    tag = "X";
  } else {
    throw ConfigError("unknown xi '" + which + "' (expected eta or process)");
  }
  const double extra = cfg.number("xi_scale", 1.0);
  if (extra != 1.0) {
    v = v.scaled(extra);
    tag += "*" + format_double(extra);
  }
  tag = std::string(to_string(spec.family)) + ":" + tag;
  return v;
}

int cmd_pickands(const KeyValueConfig& cfg, Streams io) {
  std::string tag;
  const auto xi = xi_from_config(cfg, tag);
  const double delta = cfg.number("delta");
  const std::size_t reps = cfg.integer("reps", 100000);
  const std::uint64_t seed = cfg.integer("seed", 1);
  PickandsOptions opt;
  opt.workers = cfg.integer("workers", 1);
  opt.process_tag = tag;
  const std::string est = cfg.get("estimator", "crude");
  if (est == "crude") opt.estimator = WindowEstimator::crude;
  else if (est == "tilted") opt.estimator = WindowEstimator::tilted;
  else throw ConfigError("unknown estimator '" + est + "' (expected crude or tilted)");
  const std::string functional = cfg.get("functional", "rate");

  std::ofstream file;
  std::ostream& os = open_or(file, cfg.has("output") ? cfg.get("output", "") + ".csv" : "", io.out);
  os << "process_tag,delta,S,reps,H_over_S,SE,kind,value\n";
  auto row = [&](double S, double hs, double se, const char* kind, double value) {
    os << csv_row({tag, format_double(delta), format_double(S), std::to_string(reps),
                   format_double(hs), format_double(se), kind, format_double(value)});
  };
  if (functional == "rate") {
    std::vector<double> S_grid;
    if (cfg.has("S_grid")) S_grid = cfg.numbers("S_grid");
    const auto e = estimate_H_rate(xi, delta, S_grid, reps, seed, opt);
    for (const auto& p : e.trace) row(p.S, p.H_over_S, p.se, "H_window", p.H);
    row(e.S, e.value, e.std_error, "H_rate", e.value);
    return ok;
  }
  if (functional != "H" && functional != "G")
    throw ConfigError("unknown functional '" + functional + "' (expected rate, H or G)");
  const double S = cfg.number("S");
  const auto e = functional == "H" ? estimate_H_window(xi, grid_window(S, delta), reps, seed, opt)
                                   : estimate_G_window(xi, grid_window(S, delta), reps, seed, opt);
  const double denom = e.S > 0.0 ? e.S : 1.0;
  row(e.S, e.value / denom, e.std_error / denom, to_string(e.kind), e.value);
  return ok;
}

inline ExperimentConfig experiment_from(const KeyValueConfig& cfg) {
  ExperimentConfig x{process_from_config(cfg)};
  x.delta = cfg.number("delta");
  x.T = cfg.number("T", 0.0);
  x.u_list = cfg.numbers("u");
  x.reps = cfg.integer("reps", 10000);
  x.root_seed = cfg.integer("seed", 1);
  x.workers = cfg.integer("workers", 1);
  x.horizon.safety = cfg.number("safety", x.horizon.safety);
  x.horizon.tail_eps = cfg.number("tail_eps", x.horizon.tail_eps);
  x.horizon.max_steps = cfg.integer("max_steps", x.horizon.max_steps);
  x.horizon_n = cfg.integer("horizon_n", 0);
  x.constants = constants_from(cfg);
  return x;
}

int cmd_compare(const KeyValueConfig& cfg, Streams io) {
  const auto x = experiment_from(cfg);
  const auto res = estimate_probabilities(x);
  auto json = to_json(res);
  if (res.rows.size() >= 3) {
    nlohmann::ordered_json trend;
    for (auto kind : all_probability_kinds) {
      const auto t = ratio_trend(res, kind);
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      for (const auto& p : t.points) pts.push_back({{"u", p.u}, {"ratio", p.ratio}});
      trend[to_string(kind)] = {{"points", pts}, {"drift_flag", t.drift_flag}};
    }
    json["trend"] = std::move(trend);
  }
  const std::string prefix = cfg.get("output", "");
  std::ofstream csv;
  write_comparison_csv(open_or(csv, prefix.empty() ? "" : prefix + ".csv", io.out), res);
  if (!prefix.empty()) {
    std::ofstream js;
    open_or(js, prefix + ".json", io.out) << json.dump(2) << "\n";
  }
  return res.ordering_violations == 0 ? ok : numerical_error;
}

}  // namespace detail

/// Deterministic self-check; one line per invariant.
inline int run_validate(Streams io) {
  bool all = true;
  for (const auto& c : run_invariant_suite()) {
    io.out << (c.ok ? "ok   " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all = all && c.ok;
  }
  return all ? ok : numerical_error;
}

/// Entry point: gstorage <subcommand> [--config FILE] [--key value ...].
inline int run_cli(const std::vector<std::string>& args, Streams io) {
  CLI::App app{"Reflected Gaussian storage processes on a grid: simulation, asymptotics, Pickands constants"};
  app.require_subcommand(1);
  struct Sub {
    CLI::App* app;
    std::string config;
    std::map<std::string, std::string> flags;
  };
  const std::vector<std::pair<std::string, std::string>> commands{
      {"classify", "classify the regime of phi = lim sigma^2(t)/t"},
      {"simulate", "simulate one path and dump it as CSV"},
      {"asympt", "evaluate the asymptotic formulas"},
      {"pickands", "estimate Pickands-type constants by Monte Carlo"},
      {"compare", "Monte Carlo overflow probabilities next to their asymptotics"},
      {"validate", "run the deterministic invariant suite"}};
  std::vector<std::unique_ptr<Sub>> subs;
  for (const auto& [name, help] : commands) {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(name, help);
    s->app->allow_extras();
    s->app->add_option("--config", s->config, "flat key=value file; flags override it");
    for (const auto& key : KeyValueConfig::known_keys())
      s->app->add_option("--" + key, s->flags[key], key);
    subs.push_back(std::move(s));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n";
    return config_error;
  }

  try {
    for (const auto& s : subs) {
      if (!s->app->parsed()) continue;
      const std::string name = s->app->get_name();
      for (const auto& extra : s->app->remaining()) {
        if (extra.rfind("--", 0) == 0)
          throw ConfigError("unknown configuration key '" + extra.substr(2) + "'");
        throw ConfigError("unexpected argument '" + extra + "'");
      }
      if (name == "validate") return run_validate(io);
      KeyValueConfig cfg;
      if (!s->config.empty()) cfg = KeyValueConfig::load(s->config);
      KeyValueConfig flags;
      for (const auto& [key, value] : s->flags)
        if (s->app->count("--" + key) > 0) flags.set(key, value);
      cfg.merge(flags);
      if (name == "classify") return detail::cmd_classify(cfg, io);
      if (name == "simulate") return detail::cmd_simulate(cfg, io);
      if (name == "asympt") return detail::cmd_asympt(cfg, io);
      if (name == "pickands") return detail::cmd_pickands(cfg, io);
      if (name == "compare") return detail::cmd_compare(cfg, io);
    }
  } catch (const ConfigError& e) {
    io.err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    io.err << "numerical failure: " << e.what() << "\n";
    return numerical_error;
  }
  return config_error;
}

}  // namespace gstorage::cli
