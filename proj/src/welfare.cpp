#include "nomad/welfare.hpp"

#include <chrono>
#include <cmath>

namespace nomad {

Real welfare_per_location(const Vector& pi, const SharingFunction& sharing, Real lambda, int L) {
  const int Z = static_cast<int>(pi.size()) / L;
  Real total = 0.0;
  for (int z = 0; z < Z; ++z)
    for (int n = 1; n < L; ++n) total += lambda * n * eval_sharing(sharing, z, n) * pi(z * L + n);
  return total;
}

void apply_sweep_parameter(const std::string& parameter, Real value, ModelParams& params,
                           ResourceProcess& resource, SharingFunction& sharing) {
  if (parameter == "mu") {
    Matrix rates = resource.rates;
    for (int z = 0; z < rates.rows(); ++z)
      for (int y = 0; y < rates.cols(); ++y)
        if (y != z) rates(z, y) = value;
    resource = make_resource_process(resource.states, rates);
  } else if (parameter == "beta") {
    params.beta = value;
  } else if (parameter == "gamma") {
    params.gamma = value;
  } else if (parameter == "lambda") {
    params.lambda = value;
  } else if (parameter == "alpha") {
    if (sharing.kind != SharingFunction::Kind::power)
      throw InvalidParameter("alpha sweep requires the power sharing family");
    sharing = make_power_sharing(sharing.level_payoff, value);
  } else {
    throw InvalidParameter("unknown sweep parameter '" + parameter + "'");
  }
  params.validate();
}

std::vector<SweepRow> sweep(const ModelParams& params, const ResourceProcess& resource,
                            const SharingFunction& sharing, const SolverConfig& config,
                            const std::string& parameter, const std::vector<Real>& values) {
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (Real value : values) {
    SweepRow row;
    row.parameter = parameter;
    row.value = value;
    const auto start = std::chrono::steady_clock::now();
    try {
      ModelParams p = params;
      ResourceProcess r = resource;
      SharingFunction f = sharing;
      apply_sweep_parameter(parameter, value, p, r, f);
      EquilibriumResult eq = solve_mfe(p, r, f, config);
      row.x_star = eq.x_star.x;
      row.V_sw_star = eq.V_sw_star;
      row.kappa_star = eq.kappa_star;
      row.W_L = welfare_per_location(eq.pi_star, f, p.lambda, config.L);
      row.W_A = welfare_per_agent(row.W_L, p.beta);
      row.dist = eq.dist_value;
      row.accepted = eq.accepted;
      row.solved = true;
    } catch (const std::exception& e) {
      row.solved = false;
      row.error = e.what();
    }
    row.runtime_seconds =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

CaseStudyRow case_study_revenues(const Vector& pi_star, const Vector& f, const Vector& c,
                                 Real alpha, int n_locations, int L) {
  const int Z = static_cast<int>(f.size());
  CaseStudyRow row;
  row.c0 = c(0);
  row.c1 = Z > 1 ? c(1) : c(0);
  Real dri = 0.0, plat = 0.0;
  for (int z = 0; z < Z; ++z) {
    for (int n = 1; n < L; ++n) {
      const Real payment = f(z) * std::pow(static_cast<Real>(n), 1.0 - alpha) * pi_star(z * L + n);
      dri += (1.0 - c(z)) * payment;
      plat += c(z) * payment;
    }
  }
  const Real scale = static_cast<Real>(n_locations) / 1e5;
  row.dri_rev = dri * scale;
  row.plat_rev = plat * scale;
  row.agg_rev = (dri + plat) * scale;
  return row;
}

std::vector<CaseStudyRow> run_case_study(const ModelParams& params,
                                         const ResourceProcess& resource, const Vector& f,
                                         Real alpha,
                                         const std::vector<std::pair<Real, Real>>& commissions,
                                         int n_locations, const SolverConfig& config) {
  std::vector<CaseStudyRow> rows;
  rows.reserve(commissions.size());
  for (const auto& [c0, c1] : commissions) {
    Vector c(resource.size());
    c(0) = c0;
    if (resource.size() > 1) c(1) = c1;
    Vector g(resource.size());
    for (int z = 0; z < resource.size(); ++z) g(z) = (1.0 - c(z)) * f(z);

    CaseStudyRow row;
    if (g.maxCoeff() > 0.0) {
      const SharingFunction sharing = make_power_sharing(g, alpha);
      EquilibriumResult eq = solve_mfe(params, resource, sharing, config);
      row = case_study_revenues(eq.pi_star, f, c, alpha, n_locations, config.L);
      row.x_star = eq.x_star.x;
      row.V_sw_star = eq.V_sw_star;
      row.dist = eq.dist_value;
      row.accepted = eq.accepted;
    } else {
      // Full commission: drivers earn nothing and the equilibrium payoff
      // degenerates; report zero revenue without solving.
      row.c0 = c0;
      row.c1 = c1;
      row.x_star = Vector::Zero(resource.size());
    }
    rows.push_back(std::move(row));
  }
  if (!rows.empty()) {
    const CaseStudyRow& base = rows.front();
    for (size_t i = 1; i < rows.size(); ++i) {
      auto pct = [](Real now, Real ref) { return ref != 0.0 ? 100.0 * (now - ref) / ref : 0.0; };
      rows[i].d_dri_pct = pct(rows[i].dri_rev, base.dri_rev);
      rows[i].d_plat_pct = pct(rows[i].plat_rev, base.plat_rev);
      rows[i].d_agg_pct = pct(rows[i].agg_rev, base.agg_rev);
    }
  }
  return rows;
}

}  // namespace nomad
