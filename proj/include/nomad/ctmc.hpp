#pragma once

#include <Eigen/Sparse>

#include "nomad/model.hpp"

namespace nomad {

// Truncated single-location generator on S_L = states x {0..L-1}.
// Flat state index = z * L + n. Arrivals out of n = L-1 are blocked.
struct Generator {
  int L = 0;
  Real kappa = 0.0;
  ModelParams params;
  ResourceProcess resource;
  Strategy strategy;
  Eigen::SparseMatrix<Real> Q;  // row = from-state

  int num_states() const { return resource.size() * L; }
  int index(int z, int n) const { return z * L + n; }
};

Generator build_generator(const ModelParams& params, const ResourceProcess& resource,
                          const Strategy& strategy, Real kappa, int L);

struct StationarySolution {
  Vector pi;  // flat z * L + n
  Real kappa = 0.0;
  Real phi = 0.0;       // expected occupancy
  Real residual = 0.0;  // max stationarity defect
  int L = 0;
  int Z = 0;

  Real operator()(int z, int n) const { return pi(z * L + n); }
};

StationarySolution steady_state(const Generator& g);

Real expected_occupancy(const StationarySolution& sol);

struct KappaSolveResult {
  Real kappa = 0.0;
  StationarySolution solution;
  int iterations = 0;
};

// Bisection over [beta*lambda*(1-gamma), beta*lambda] for the arrival rate
// with |phi(kappa) - beta| <= eps1.
KappaSolveResult solve_kappa(const ModelParams& params, const ResourceProcess& resource,
                             const Strategy& strategy, int L, Real eps1);

// P(X > n) for X ~ Poisson(mean), evaluated stably for large means.
Real poisson_tail_above(int n, Real mean);

// Tail mass of the dominating Poisson(beta/(1-gamma)) law above L-1; the
// truncation is considered adequate when this is below 1e-8.
Real truncation_tail_mass(const ModelParams& params, int L);

// Validation-oriented alternatives to the QBD path.
Vector steady_state_sparse_lu(const Generator& g);
Vector steady_state_power_iteration(const Generator& g, Real tol = 1e-13,
                                    long max_iterations = 5'000'000);

}  // namespace nomad
