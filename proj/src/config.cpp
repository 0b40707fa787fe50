#include "nomad/config.hpp"

#include <fstream>
#include <set>

namespace nomad {

namespace {

void reject_unknown_keys(const Json& obj, const std::string& scope,
                         const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key))
      throw ConfigError("unknown key '" + (scope.empty() ? key : scope + "." + key) + "'");
  }
}

const Json& require(const Json& obj, const std::string& scope, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError("missing key '" + (scope.empty() ? key : scope + "." + key) + "'");
  return *it;
}

Real require_number(const Json& obj, const std::string& scope, const std::string& key) {
  const Json& v = require(obj, scope, key);
  if (!v.is_number())
    throw ConfigError("key '" + scope + "." + key + "' must be a number");
  return v.get<Real>();
}

Real number_or(const Json& obj, const std::string& scope, const std::string& key, Real fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ConfigError("key '" + scope + "." + key + "' must be a number");
  return it->get<Real>();
}

int int_or(const Json& obj, const std::string& scope, const std::string& key, int fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer())
    throw ConfigError("key '" + scope + "." + key + "' must be an integer");
  return it->get<int>();
}

bool bool_or(const Json& obj, const std::string& scope, const std::string& key, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError("key '" + scope + "." + key + "' must be a boolean");
  return it->get<bool>();
}

std::vector<Real> require_number_list(const Json& obj, const std::string& scope,
                                      const std::string& key) {
  const Json& v = require(obj, scope, key);
  if (!v.is_array()) throw ConfigError("key '" + scope + "." + key + "' must be an array");
  std::vector<Real> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("key '" + scope + "." + key + "' must hold numbers");
    out.push_back(e.get<Real>());
  }
  return out;
}

ModelParams parse_model(const Json& obj) {
  reject_unknown_keys(obj, "model", {"lambda", "gamma", "beta"});
  ModelParams p;
  p.lambda = require_number(obj, "model", "lambda");
  p.gamma = require_number(obj, "model", "gamma");
  p.beta = require_number(obj, "model", "beta");
  try {
    p.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return p;
}

ResourceProcess parse_resource(const Json& obj) {
  reject_unknown_keys(obj, "resource", {"states", "rates"});
  const Json& states = require(obj, "resource", "states");
  if (!states.is_array() || states.empty())
    throw ConfigError("key 'resource.states' must be a non-empty array");
  std::vector<std::string> labels;
  for (const auto& s : states) {
    if (s.is_string())
      labels.push_back(s.get<std::string>());
    else if (s.is_number())
      labels.push_back(s.dump());
    else
      throw ConfigError("key 'resource.states' entries must be strings or numbers");
  }
  const Json& rates = require(obj, "resource", "rates");
  const int Z = static_cast<int>(labels.size());
  if (!rates.is_array() || static_cast<int>(rates.size()) != Z)
    throw ConfigError("key 'resource.rates' must be a " + std::to_string(Z) + "x" +
                      std::to_string(Z) + " matrix");
  Matrix m(Z, Z);
  for (int z = 0; z < Z; ++z) {
    const Json& row = rates[z];
    if (!row.is_array() || static_cast<int>(row.size()) != Z)
      throw ConfigError("key 'resource.rates' row " + std::to_string(z) + " has wrong length");
    for (int y = 0; y < Z; ++y) {
      if (!row[y].is_number())
        throw ConfigError("key 'resource.rates' must hold numbers");
      m(z, y) = row[y].get<Real>();
    }
  }
  try {
    return make_resource_process(std::move(labels), std::move(m));
  } catch (const SolverError& e) {
    throw ConfigError(std::string("resource.rates: ") + e.what());
  }
}

SharingFunction parse_sharing(const Json& obj, int Z) {
  reject_unknown_keys(obj, "sharing", {"kind", "alpha", "level_payoffs", "table", "decreasing"});
  const Json& kind = require(obj, "sharing", "kind");
  if (!kind.is_string()) throw ConfigError("key 'sharing.kind' must be a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "power") {
      std::vector<Real> g = require_number_list(obj, "sharing", "level_payoffs");
      if (static_cast<int>(g.size()) != Z)
        throw ConfigError("key 'sharing.level_payoffs' must have one entry per resource state");
      Vector gv = Eigen::Map<Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
      return make_power_sharing(gv, require_number(obj, "sharing", "alpha"));
    }
    if (k == "table") {
      const Json& tab = require(obj, "sharing", "table");
      if (!tab.is_array() || static_cast<int>(tab.size()) != Z)
        throw ConfigError("key 'sharing.table' must have one row per resource state");
      const auto cols = tab[0].size();
      Matrix values(Z, cols);
      for (int z = 0; z < Z; ++z) {
        if (!tab[z].is_array() || tab[z].size() != cols)
          throw ConfigError("key 'sharing.table' rows must have equal length");
        for (size_t j = 0; j < cols; ++j) values(z, j) = tab[z][j].get<Real>();
      }
      return make_table_sharing(values, bool_or(obj, "sharing", "decreasing", false));
    }
  } catch (const SolverError& e) {
    throw ConfigError(std::string("sharing: ") + e.what());
  }
  throw ConfigError("key 'sharing.kind' must be 'power' or 'table'");
}

SolverConfig parse_solver(const Json& obj) {
  reject_unknown_keys(obj, "solver",
                      {"L", "k", "eps0", "eps1", "eps2", "max_restarts", "max_refinements",
                       "seed", "early_exit", "threads", "nm_max_iterations"});
  SolverConfig c;
  c.L = int_or(obj, "solver", "L", c.L);
  c.k = int_or(obj, "solver", "k", c.k);
  c.eps0 = number_or(obj, "solver", "eps0", c.eps0);
  c.eps1 = number_or(obj, "solver", "eps1", c.eps1);
  c.eps2 = number_or(obj, "solver", "eps2", c.eps2);
  c.max_restarts = int_or(obj, "solver", "max_restarts", c.max_restarts);
  c.max_refinements = int_or(obj, "solver", "max_refinements", c.max_refinements);
  c.early_exit = bool_or(obj, "solver", "early_exit", c.early_exit);
  c.threads = int_or(obj, "solver", "threads", c.threads);
  c.nelder_mead.max_iterations =
      int_or(obj, "solver", "nm_max_iterations", c.nelder_mead.max_iterations);
  if (c.L < 2) throw ConfigError("key 'solver.L' must be >= 2");
  if (c.k < 1) throw ConfigError("key 'solver.k' must be >= 1");
  if (!(c.eps0 > 0.0)) throw ConfigError("key 'solver.eps0' must be > 0");
  if (!(c.eps1 > 0.0)) throw ConfigError("key 'solver.eps1' must be > 0");
  if (!(c.eps2 > 0.0)) throw ConfigError("key 'solver.eps2' must be > 0");
  if (c.max_restarts < 1) throw ConfigError("key 'solver.max_restarts' must be >= 1");
  if (c.max_refinements < 0) throw ConfigError("key 'solver.max_refinements' must be >= 0");
  return c;
}

SweepSpec parse_sweep(const Json& obj) {
  reject_unknown_keys(obj, "sweep", {"parameter", "values"});
  SweepSpec s;
  const Json& p = require(obj, "sweep", "parameter");
  if (!p.is_string()) throw ConfigError("key 'sweep.parameter' must be a string");
  s.parameter = p.get<std::string>();
  s.values = require_number_list(obj, "sweep", "values");
  if (s.values.empty()) throw ConfigError("key 'sweep.values' must be non-empty");
  return s;
}

CaseStudySpec parse_casestudy(const Json& obj, int Z) {
  reject_unknown_keys(obj, "casestudy", {"f", "commissions", "n_locations"});
  CaseStudySpec c;
  c.f = require_number_list(obj, "casestudy", "f");
  if (static_cast<int>(c.f.size()) != Z)
    throw ConfigError("key 'casestudy.f' must have one entry per resource state");
  const Json& com = require(obj, "casestudy", "commissions");
  if (!com.is_array() || com.empty())
    throw ConfigError("key 'casestudy.commissions' must be a non-empty array of [c0, c1] pairs");
  for (const auto& row : com) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
      throw ConfigError("key 'casestudy.commissions' entries must be [c0, c1] number pairs");
    c.commissions.emplace_back(row[0].get<Real>(), row[1].get<Real>());
  }
  c.n_locations = int_or(obj, "casestudy", "n_locations", c.n_locations);
  if (c.n_locations < 1) throw ConfigError("key 'casestudy.n_locations' must be >= 1");
  return c;
}

SimulateSpec parse_simulate(const Json& obj) {
  reject_unknown_keys(obj, "simulate",
                      {"kind", "horizon", "replications", "K", "max_events", "thresholds",
                       "kappa"});
  SimulateSpec s;
  auto it = obj.find("kind");
  if (it != obj.end()) {
    if (!it->is_string()) throw ConfigError("key 'simulate.kind' must be a string");
    s.kind = it->get<std::string>();
    if (s.kind != "location" && s.kind != "dominance" && s.kind != "finite")
      throw ConfigError("key 'simulate.kind' must be location, dominance or finite");
  }
  s.horizon = require_number(obj, "simulate", "horizon");
  if (!(s.horizon > 0.0)) throw ConfigError("key 'simulate.horizon' must be > 0");
  s.replications = int_or(obj, "simulate", "replications", s.replications);
  if (s.replications < 1) throw ConfigError("key 'simulate.replications' must be >= 1");
  s.K = int_or(obj, "simulate", "K", s.K);
  auto me = obj.find("max_events");
  if (me != obj.end()) {
    if (!me->is_number_unsigned())
      throw ConfigError("key 'simulate.max_events' must be a nonnegative integer");
    s.max_events = me->get<std::uint64_t>();
  }
  auto th = obj.find("thresholds");
  if (th != obj.end()) {
    if (!th->is_array()) throw ConfigError("key 'simulate.thresholds' must be an array");
    std::vector<Real> x;
    for (const auto& e : *th) x.push_back(e.get<Real>());
    s.thresholds = std::move(x);
  }
  auto ka = obj.find("kappa");
  if (ka != obj.end()) {
    if (!ka->is_number()) throw ConfigError("key 'simulate.kappa' must be a number");
    s.kappa = ka->get<Real>();
  }
  return s;
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(doc, "",
                      {"model", "resource", "sharing", "solver", "seed", "sweep", "casestudy",
                       "simulate"});
  RunConfig cfg;
  cfg.model = parse_model(require(doc, "", "model"));
  cfg.resource = parse_resource(require(doc, "", "resource"));
  cfg.sharing = parse_sharing(require(doc, "", "sharing"), cfg.resource.size());
  if (doc.contains("solver")) cfg.solver = parse_solver(doc["solver"]);
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned())
      throw ConfigError("key 'seed' must be a nonnegative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("sweep")) cfg.sweep = parse_sweep(doc["sweep"]);
  if (doc.contains("casestudy")) cfg.casestudy = parse_casestudy(doc["casestudy"], cfg.resource.size());
  if (doc.contains("simulate")) cfg.simulate = parse_simulate(doc["simulate"]);

  if (cfg.sharing.kind == SharingFunction::Kind::table &&
      static_cast<int>(cfg.sharing.table.cols()) < cfg.solver.L)
    throw ConfigError("key 'sharing.table' must cover n = 1..L (solver.L = " +
                      std::to_string(cfg.solver.L) + ")");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

Json config_to_json(const RunConfig& cfg) {
  Json doc;
  doc["model"] = {{"lambda", cfg.model.lambda}, {"gamma", cfg.model.gamma},
                  {"beta", cfg.model.beta}};
  doc["resource"]["states"] = cfg.resource.states;
  Json rates = Json::array();
  for (int z = 0; z < cfg.resource.size(); ++z) {
    Json row = Json::array();
    for (int y = 0; y < cfg.resource.size(); ++y) row.push_back(cfg.resource.rates(z, y));
    rates.push_back(row);
  }
  doc["resource"]["rates"] = rates;
  if (cfg.sharing.kind == SharingFunction::Kind::power) {
    doc["sharing"]["kind"] = "power";
    doc["sharing"]["alpha"] = cfg.sharing.alpha;
    doc["sharing"]["level_payoffs"] =
        std::vector<Real>(cfg.sharing.level_payoff.begin(), cfg.sharing.level_payoff.end());
  } else {
    doc["sharing"]["kind"] = "table";
    doc["sharing"]["decreasing"] = cfg.sharing.decreasing;
    Json tab = Json::array();
    for (int z = 0; z < cfg.sharing.table.rows(); ++z) {
      Json row = Json::array();
      for (int j = 0; j < cfg.sharing.table.cols(); ++j) row.push_back(cfg.sharing.table(z, j));
      tab.push_back(row);
    }
    doc["sharing"]["table"] = tab;
  }
  doc["solver"] = {{"L", cfg.solver.L},
                   {"k", cfg.solver.k},
                   {"eps0", cfg.solver.eps0},
                   {"eps1", cfg.solver.eps1},
                   {"eps2", cfg.solver.eps2},
                   {"max_restarts", cfg.solver.max_restarts},
                   {"max_refinements", cfg.solver.max_refinements},
                   {"early_exit", cfg.solver.early_exit},
                   {"threads", cfg.solver.threads},
                   {"nm_max_iterations", cfg.solver.nelder_mead.max_iterations}};
  doc["seed"] = cfg.seed;
  if (cfg.sweep) doc["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
  if (cfg.casestudy) {
    Json com = Json::array();
    for (const auto& [c0, c1] : cfg.casestudy->commissions) com.push_back({c0, c1});
    doc["casestudy"] = {{"f", cfg.casestudy->f},
                        {"commissions", com},
                        {"n_locations", cfg.casestudy->n_locations}};
  }
  if (cfg.simulate) {
    Json sim = {{"kind", cfg.simulate->kind},
                {"horizon", cfg.simulate->horizon},
                {"replications", cfg.simulate->replications},
                {"K", cfg.simulate->K}};
    if (cfg.simulate->max_events != UINT64_MAX) sim["max_events"] = cfg.simulate->max_events;
    if (cfg.simulate->thresholds) sim["thresholds"] = *cfg.simulate->thresholds;
    if (cfg.simulate->kappa) sim["kappa"] = *cfg.simulate->kappa;
    doc["simulate"] = sim;
  }
  return doc;
}

}  // namespace nomad
