#include "nomad/io.hpp"

#include <cstdio>

namespace nomad {

std::string format_number(Real value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, int num_states) {
  std::string out = "param,value";
  for (int z = 0; z < num_states; ++z) out += ",x_" + std::to_string(z);
  out += ",V_sw,kappa,W_L,W_A,dist,accepted\n";
  for (const auto& row : rows) {
    out += row.parameter + "," + format_number(row.value);
    for (int z = 0; z < num_states; ++z)
      out += "," + (row.solved ? format_number(row.x_star(z)) : std::string("nan"));
    if (row.solved) {
      out += "," + format_number(row.V_sw_star) + "," + format_number(row.kappa_star) + "," +
             format_number(row.W_L) + "," + format_number(row.W_A) + "," +
             format_number(row.dist) + "," + (row.accepted ? "true" : "false");
    } else {
      out += ",nan,nan,nan,nan,nan,false";
    }
    out += "\n";
  }
  return out;
}

std::string casestudy_csv(const std::vector<CaseStudyRow>& rows) {
  std::string out =
      "c0,c1,DriRev,dDriRev_pct,PlatRev,dPlatRev_pct,AggRev,dAggRev_pct,dist,accepted\n";
  for (const auto& row : rows) {
    out += format_number(row.c0) + "," + format_number(row.c1) + "," +
           format_number(row.dri_rev) + "," + format_number(row.d_dri_pct) + "," +
           format_number(row.plat_rev) + "," + format_number(row.d_plat_pct) + "," +
           format_number(row.agg_rev) + "," + format_number(row.d_agg_pct) + "," +
           format_number(row.dist) + "," + (row.accepted ? "true" : "false") + "\n";
  }
  return out;
}

Json equilibrium_to_json(const EquilibriumResult& result, bool include_distribution) {
  Json out;
  out["x_star"] = std::vector<Real>(result.x_star.x.begin(), result.x_star.x.end());
  out["V_sw_star"] = result.V_sw_star;
  out["kappa_star"] = result.kappa_star;
  out["dist"] = result.dist_value;
  out["value_gap"] = result.value_gap;
  out["threshold_gap"] = result.threshold_gap;
  out["phi"] = result.phi;
  out["accepted"] = result.accepted;
  out["restarts_used"] = result.restarts_used;
  out["refinements_used"] = result.refinements_used;
  out["evaluations"] = result.evaluations;
  out["value_iterations"] = result.value_functions.iterations;
  out["intervals"] = {
      {"lower", std::vector<Real>(result.intervals.lower.begin(), result.intervals.lower.end())},
      {"upper", std::vector<Real>(result.intervals.upper.begin(), result.intervals.upper.end())}};
  out["bounds"] = {{"V_lower", result.bounds.lower},
                   {"V_upper", result.bounds.upper},
                   {"lower_underflowed", result.bounds.lower_underflowed}};
  if (include_distribution)
    out["pi_star"] = std::vector<Real>(result.pi_star.begin(), result.pi_star.end());
  return out;
}

Json sweep_to_json(const std::vector<SweepRow>& rows) {
  Json out = Json::array();
  for (const auto& row : rows) {
    Json r;
    r["param"] = row.parameter;
    r["value"] = row.value;
    r["solved"] = row.solved;
    if (row.solved) {
      r["x_star"] = std::vector<Real>(row.x_star.begin(), row.x_star.end());
      r["V_sw"] = row.V_sw_star;
      r["kappa"] = row.kappa_star;
      r["W_L"] = row.W_L;
      r["W_A"] = row.W_A;
      r["dist"] = row.dist;
      r["accepted"] = row.accepted;
    } else {
      r["error"] = row.error;
    }
    r["runtime_seconds"] = row.runtime_seconds;
    out.push_back(r);
  }
  return out;
}

Json casestudy_to_json(const std::vector<CaseStudyRow>& rows) {
  Json out = Json::array();
  for (const auto& row : rows) {
    Json r;
    r["c0"] = row.c0;
    r["c1"] = row.c1;
    r["DriRev"] = row.dri_rev;
    r["PlatRev"] = row.plat_rev;
    r["AggRev"] = row.agg_rev;
    r["dDriRev_pct"] = row.d_dri_pct;
    r["dPlatRev_pct"] = row.d_plat_pct;
    r["dAggRev_pct"] = row.d_agg_pct;
    r["x_star"] = std::vector<Real>(row.x_star.begin(), row.x_star.end());
    r["V_sw_star"] = row.V_sw_star;
    r["dist"] = row.dist;
    r["accepted"] = row.accepted;
    out.push_back(r);
  }
  return out;
}

Json validation_to_json(const ValidationReport& report) {
  return Json{{"dist", report.dist},
              {"value_gap", report.value_gap},
              {"threshold_gap", report.threshold_gap},
              {"occupancy_gap", report.occupancy_gap},
              {"bellman_residual", report.bellman_residual},
              {"monotonicity_defect", report.monotonicity_defect},
              {"truncation_tail", report.truncation_tail},
              {"accepted", report.accepted}};
}

}  // namespace nomad
