// Command-line front end: solve, sweep, casestudy, simulate and validate
// subcommands over a JSON run configuration. Data goes to --out or stdout,
// diagnostics to stderr. Exit codes: 0 ok, 2 config error, 3 equilibrium not
// accepted, 4 runtime failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "nomad/config.hpp"
#include "nomad/io.hpp"
#include "nomad/parallel.hpp"
#include "nomad/simulate.hpp"

namespace {

using namespace nomad;

enum class LogLevel { quiet = 0, info = 1, debug = 2 };
LogLevel g_log_level = LogLevel::info;

void log_info(const std::string& msg) {
  if (g_log_level >= LogLevel::info) std::cerr << msg << "\n";
}

void write_output(const std::string& payload, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + out_path + "'");
  out << payload;
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

ThresholdVector thresholds_from(const std::vector<Real>& values) {
  ThresholdVector x;
  x.x = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return x;
}

int run_solve(const RunConfig& cfg, const std::string& out_path, const std::string& format) {
  EquilibriumResult eq = solve_mfe(cfg.model, cfg.resource, cfg.sharing, cfg.solver);
  const Real w_l = welfare_per_location(eq.pi_star, cfg.sharing, cfg.model.lambda, cfg.solver.L);
  Json doc;
  doc["config"] = config_to_json(cfg);
  doc["result"] = equilibrium_to_json(eq);
  doc["result"]["W_L"] = w_l;
  doc["result"]["W_A"] = welfare_per_agent(w_l, cfg.model.beta);
  if (format == "csv") {
    SweepRow row;
    row.parameter = "none";
    row.value = 0.0;
    row.x_star = eq.x_star.x;
    row.V_sw_star = eq.V_sw_star;
    row.kappa_star = eq.kappa_star;
    row.W_L = w_l;
    row.W_A = welfare_per_agent(w_l, cfg.model.beta);
    row.dist = eq.dist_value;
    row.accepted = eq.accepted;
    row.solved = true;
    write_output(sweep_csv({row}, cfg.resource.size()), out_path);
  } else {
    write_output(dump_json(doc), out_path);
  }
  log_info("solve: dist = " + format_number(eq.dist_value) +
           (eq.accepted ? " (accepted)" : " (NOT accepted)"));
  return eq.accepted ? 0 : 3;
}

int run_sweep(const RunConfig& cfg, const std::string& out_path, const std::string& format) {
  if (!cfg.sweep) throw ConfigError("missing key 'sweep'");
  const auto rows = sweep(cfg.model, cfg.resource, cfg.sharing, cfg.solver,
                          cfg.sweep->parameter, cfg.sweep->values);
  if (format == "csv") {
    write_output(sweep_csv(rows, cfg.resource.size()), out_path);
  } else {
    Json doc;
    doc["config"] = config_to_json(cfg);
    doc["rows"] = sweep_to_json(rows);
    write_output(dump_json(doc), out_path);
  }
  bool all_accepted = true;
  for (const auto& r : rows) all_accepted = all_accepted && r.solved && r.accepted;
  return all_accepted ? 0 : 3;
}

int run_casestudy(const RunConfig& cfg, const std::string& out_path, const std::string& format) {
  if (!cfg.casestudy) throw ConfigError("missing key 'casestudy'");
  if (cfg.sharing.kind != SharingFunction::Kind::power)
    throw ConfigError("key 'sharing.kind' must be 'power' for the case study");
  Vector f = Eigen::Map<const Vector>(cfg.casestudy->f.data(),
                                      static_cast<Eigen::Index>(cfg.casestudy->f.size()));
  const auto rows = run_case_study(cfg.model, cfg.resource, f, cfg.sharing.alpha,
                                   cfg.casestudy->commissions, cfg.casestudy->n_locations,
                                   cfg.solver);
  if (format == "csv") {
    write_output(casestudy_csv(rows), out_path);
  } else {
    Json doc;
    doc["config"] = config_to_json(cfg);
    doc["rows"] = casestudy_to_json(rows);
    write_output(dump_json(doc), out_path);
  }
  bool all_accepted = true;
  for (const auto& r : rows) all_accepted = all_accepted && (r.accepted || r.agg_rev == 0.0);
  return all_accepted ? 0 : 3;
}

int run_simulate(const RunConfig& cfg, const std::string& out_path, const std::string& format,
                 std::uint64_t seed) {
  if (!cfg.simulate) throw ConfigError("missing key 'simulate'");
  const SimulateSpec& spec = *cfg.simulate;

  ThresholdVector x;
  Real kappa = 0.0;
  if (spec.thresholds) {
    if (static_cast<int>(spec.thresholds->size()) != cfg.resource.size())
      throw ConfigError("key 'simulate.thresholds' must have one entry per resource state");
    x = thresholds_from(*spec.thresholds);
  } else {
    log_info("simulate: no thresholds given, solving for the equilibrium first");
    EquilibriumResult eq = solve_mfe(cfg.model, cfg.resource, cfg.sharing, cfg.solver);
    x = eq.x_star;
    kappa = eq.kappa_star;
  }
  const Strategy strategy = strategy_from_threshold(x, cfg.solver.L);
  if (spec.kappa) {
    kappa = *spec.kappa;
  } else if (kappa == 0.0) {
    kappa = solve_kappa(cfg.model, cfg.resource, strategy, cfg.solver.L, cfg.solver.eps1).kappa;
  }

  Json runs = Json::array();
  for (int rep = 0; rep < spec.replications; ++rep) {
    const std::uint64_t rep_seed = seed + static_cast<std::uint64_t>(rep);
    Json r;
    if (spec.kind == "location") {
      SimulateOptions opt;
      opt.max_events = spec.max_events;
      opt.sharing = &cfg.sharing;
      TrajectoryStats st =
          simulate_location(cfg.model, cfg.resource, strategy, kappa, spec.horizon, rep_seed, opt);
      r = {{"seed", st.seed},
           {"events", st.events},
           {"time_avg_occupancy", st.time_avg_occupancy},
           {"occupancy_halfwidth", st.occupancy_halfwidth},
           {"payoff_rate", st.payoff_rate},
           {"payoff_halfwidth", st.payoff_halfwidth}};
    } else if (spec.kind == "dominance") {
      DominanceReport rep_d =
          simulate_coupled_dominance(cfg.model, cfg.resource, strategy, kappa, spec.horizon,
                                     rep_seed);
      r = {{"seed", rep_seed},
           {"events", rep_d.events},
           {"sandwich_held", rep_d.sandwich_held},
           {"violations", rep_d.violations},
           {"time_avg_lower", rep_d.time_avg_lower},
           {"time_avg_mid", rep_d.time_avg_mid},
           {"time_avg_upper", rep_d.time_avg_upper}};
    } else {
      FiniteSystemStats st = simulate_finite_system(spec.K, cfg.model, cfg.resource, strategy,
                                                    cfg.sharing, spec.horizon, rep_seed);
      r = {{"seed", st.seed},
           {"events", st.events},
           {"locations", st.locations},
           {"agents", st.agents},
           {"occupancy_mean", st.occupancy_mean},
           {"switch_samples", st.switch_samples},
           {"post_switch_payoff_mean", st.post_switch_payoff_mean},
           {"post_switch_payoff_halfwidth", st.post_switch_payoff_halfwidth}};
    }
    runs.push_back(r);
  }
  Json doc;
  doc["config"] = config_to_json(cfg);
  doc["kappa"] = kappa;
  doc["thresholds"] = std::vector<Real>(x.x.begin(), x.x.end());
  doc["runs"] = runs;
  (void)format;
  write_output(dump_json(doc), out_path);
  return 0;
}

int run_validate(const std::string& config_path, const std::string& out_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("result file is not valid JSON: ") + e.what());
  }
  if (!doc.contains("config") || !doc.contains("result"))
    throw ConfigError("validate expects a result file with 'config' and 'result' sections");
  RunConfig cfg = parse_config(doc["config"]);
  const Json& res = doc["result"];
  if (!res.contains("x_star") || !res.contains("V_sw_star"))
    throw ConfigError("missing key 'result.x_star' or 'result.V_sw_star'");
  ThresholdVector x = thresholds_from(res["x_star"].get<std::vector<Real>>());
  const Real v_sw = res["V_sw_star"].get<Real>();

  MfeProblem problem(cfg.model, cfg.resource, cfg.sharing, cfg.solver);
  ValidationReport report = validate_equilibrium(problem, x, v_sw, cfg.solver.eps2);
  Json out = validation_to_json(report);
  if (res.contains("dist")) {
    const Real recorded = res["dist"].get<Real>();
    out["recorded_dist"] = recorded;
    out["dist_discrepancy"] = std::abs(recorded - report.dist);
  }
  write_output(dump_json(out), out_path);
  return report.accepted ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean field equilibria of nomadic-agent resource competition"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "json", log_level = "info";
  std::optional<std::uint64_t> seed_override;
  app.add_option("--log-level", log_level, "quiet|info|debug");

  auto add_common = [&](CLI::App* cmd, bool with_format = true) {
    cmd->add_option("--config", config_path, "Path to the run configuration")->required();
    cmd->add_option("--out", out_path, "Output path (default: stdout)");
    if (with_format) cmd->add_option("--format", format, "csv|json");
    cmd->add_option("--seed", seed_override, "Seed override");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "Compute one mean field equilibrium");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Equilibria across a parameter grid");
  CLI::App* case_cmd = app.add_subcommand("casestudy", "Commission scenarios and revenue split");
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Stochastic validators");
  CLI::App* val_cmd = app.add_subcommand("validate", "Re-verify a written solve result");
  for (CLI::App* cmd : {solve_cmd, sweep_cmd, case_cmd, sim_cmd}) add_common(cmd);
  add_common(val_cmd, false);

  CLI11_PARSE(app, argc, argv);

  if (log_level == "quiet")
    g_log_level = LogLevel::quiet;
  else if (log_level == "debug")
    g_log_level = LogLevel::debug;

  if (format != "csv" && format != "json") {
    std::cerr << "error: --format must be csv or json\n";
    return 2;
  }

  try {
    if (val_cmd->parsed()) return run_validate(config_path, out_path);

    RunConfig cfg = load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (solve_cmd->parsed()) return run_solve(cfg, out_path, format);
    if (sweep_cmd->parsed()) return run_sweep(cfg, out_path, format);
    if (case_cmd->parsed()) return run_casestudy(cfg, out_path, format);
    if (sim_cmd->parsed()) return run_simulate(cfg, out_path, format, cfg.seed);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
