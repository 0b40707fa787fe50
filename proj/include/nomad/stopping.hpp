#pragma once

#include "nomad/blocktri.hpp"
#include "nomad/ctmc.hpp"
#include "nomad/model.hpp"

namespace nomad {

// Value functions of the tagged-agent optimal stopping problem on the
// truncated space, for n = 1..L stored in column n-1.
struct ValueFunctions {
  Matrix V;     // value at a decision epoch
  Matrix V_st;  // continuation payoff after staying and surviving
  long iterations = 0;
  Real final_delta = 0.0;

  int num_states() const { return static_cast<int>(V.rows()); }
  int L() const { return static_cast<int>(V.cols()); }
  Real value(int z, int n) const { return V(z, n - 1); }
  Real stay(int z, int n) const { return V_st(z, n - 1); }
};

// Exact expectation of a terminal function at the tagged agent's next
// decision epoch, obtained by solving the first-transition linear system
// once per (strategy, kappa). Events out of (z, n): own epoch (rate lambda),
// arrival (kappa, dropped at n = L), resource flip (mu_zy), a competitor's
// epoch with departure ((n-1) lambda (1 - gamma xi)) or with stay (self
// loop). Rows are scaled by the total event rate, so applying the operator
// to a bounded function is an average over paths.
class StayOperator {
 public:
  StayOperator(const ModelParams& params, const ResourceProcess& resource,
               const Strategy& strategy, Real kappa, int L);

  // V_st = E[V at next own epoch], both num_states x L with column n-1.
  Matrix apply(const Matrix& V) const;

  int num_states() const { return Z_; }
  int L() const { return L_; }

 private:
  int Z_ = 0;
  int L_ = 0;
  Real lambda_ = 0.0;
  BlockTridiagonalLU<Real> system_;
};

// One synchronous Bellman sweep: F + gamma * max{E V, V_sw}. Contracts sup
// distance between any two inputs by gamma.
Matrix bellman_sweep(const StayOperator& stay, const SharingFunction& sharing, Real gamma,
                     Real V_sw, const Matrix& V);

ValueFunctions value_iterate(const ModelParams& params, const ResourceProcess& resource,
                             const Strategy& strategy, const SharingFunction& sharing, Real kappa,
                             Real V_sw, int L, Real eps0, long max_sweeps = 1'000'000);

// Eq.-4 aggregation: sum over pi(z, n) of V_st(z, n+1).
Real switch_value(const StationarySolution& sol, const ValueFunctions& vf);

// Per state, the closed interval [a_z, b_z] of approximately optimal
// thresholds for the computed continuation values.
struct ThresholdIntervals {
  Vector lower;  // a_z
  Vector upper;  // b_z

  Real clamp_distance(int z, Real x_z) const {
    if (x_z < lower(z)) return lower(z) - x_z;
    if (x_z > upper(z)) return x_z - upper(z);
    return 0.0;
  }
};

ThresholdIntervals optimal_threshold_set(const ValueFunctions& vf, Real V_sw, Real eps);

struct ValueBounds {
  Real lower = 0.0;  // series lower bound on the switching payoff
  Real upper = 0.0;  // ||F||_inf / (1 - gamma)
  bool lower_underflowed = false;

  // Search interval used by the equilibrium solver; the lower edge defaults
  // to 1e-12 when the series underflows to zero.
  Real search_lower() const { return lower_underflowed ? 1e-12 : lower; }
};

ValueBounds value_bounds(const ModelParams& params, const ResourceProcess& resource,
                         const SharingFunction& sharing, int L);

}  // namespace nomad
