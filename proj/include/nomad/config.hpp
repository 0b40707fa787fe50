#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nomad/equilibrium.hpp"
#include "nomad/welfare.hpp"

namespace nomad {

using Json = nlohmann::json;

struct SweepSpec {
  std::string parameter;
  std::vector<Real> values;
};

struct CaseStudySpec {
  std::vector<Real> f;  // rider payment rate per resource state
  std::vector<std::pair<Real, Real>> commissions;
  int n_locations = 12;
};

struct SimulateSpec {
  std::string kind = "location";  // location | dominance | finite
  Real horizon = 0.0;
  int replications = 1;
  int K = 50;
  std::uint64_t max_events = UINT64_MAX;
  std::optional<std::vector<Real>> thresholds;  // solve for the MFE if absent
  std::optional<Real> kappa;                    // solve for kappa(x) if absent
};

struct RunConfig {
  ModelParams model;
  ResourceProcess resource;
  SharingFunction sharing;
  SolverConfig solver;
  std::uint64_t seed = 0;
  std::optional<SweepSpec> sweep;
  std::optional<CaseStudySpec> casestudy;
  std::optional<SimulateSpec> simulate;
};

// Parses and fully validates a config document; throws ConfigError with the
// offending key path in the message.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

// Resolved config back in document form (for embedding into results).
Json config_to_json(const RunConfig& config);

}  // namespace nomad
