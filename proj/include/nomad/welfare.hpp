#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nomad/equilibrium.hpp"

namespace nomad {

// W_L = sum over z, n>=1 of lambda * n * F(z,n) * pi(z,n)
Real welfare_per_location(const Vector& pi, const SharingFunction& sharing, Real lambda, int L);

inline Real welfare_per_agent(Real W_L, Real beta) { return W_L / beta; }

struct SweepRow {
  std::string parameter;
  Real value = 0.0;
  Vector x_star;
  Real V_sw_star = 0.0;
  Real kappa_star = 0.0;
  Real W_L = 0.0;
  Real W_A = 0.0;
  Real dist = 0.0;
  bool accepted = false;
  bool solved = false;  // false when the solve itself failed
  Real runtime_seconds = 0.0;
  std::string error;
};

// Supported sweep parameters: "mu" (sets every off-diagonal resource rate),
// "beta", "alpha", "gamma", "lambda".
void apply_sweep_parameter(const std::string& parameter, Real value, ModelParams& params,
                           ResourceProcess& resource, SharingFunction& sharing);

std::vector<SweepRow> sweep(const ModelParams& params, const ResourceProcess& resource,
                            const SharingFunction& sharing, const SolverConfig& config,
                            const std::string& parameter, const std::vector<Real>& values);

struct CaseStudyRow {
  Real c0 = 0.0, c1 = 0.0;     // commission per resource state
  Real dri_rev = 0.0;          // driver revenue rate, units 1e5 dollars/hour
  Real plat_rev = 0.0;         // platform revenue rate
  Real agg_rev = 0.0;          // aggregate revenue rate
  Real d_dri_pct = 0.0;        // percent change vs. the base row
  Real d_plat_pct = 0.0;
  Real d_agg_pct = 0.0;
  Vector x_star;
  Real V_sw_star = 0.0;
  Real dist = 0.0;
  bool accepted = false;
};

// Revenue rates under equilibrium occupancy pi_star computed for
// F(z,n) = (1-c(z)) f(z) / n^alpha. Revenues are rider-payment rates
// n^{1-alpha} f(z) split between drivers and platform; no lambda factor.
CaseStudyRow case_study_revenues(const Vector& pi_star, const Vector& f, const Vector& c,
                                 Real alpha, int n_locations, int L);

// Solves one equilibrium per commission scenario (first row is the base) and
// fills the delta columns.
std::vector<CaseStudyRow> run_case_study(const ModelParams& params,
                                         const ResourceProcess& resource, const Vector& f,
                                         Real alpha,
                                         const std::vector<std::pair<Real, Real>>& commissions,
                                         int n_locations, const SolverConfig& config);

}  // namespace nomad
