#pragma once

#include <cstdint>
#include <optional>

#include "nomad/model.hpp"

namespace nomad {

// Time-average statistics of one simulated location under the Eq.-1 dynamics.
struct TrajectoryStats {
  Real horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  Real time_avg_occupancy = 0.0;
  Real occupancy_halfwidth = 0.0;
  Vector empirical_dist;  // over S_L, flat z*L+n, occupancy clamped at L-1
  Real payoff_rate = 0.0;  // time average of lambda * n * F(z,n)
  Real payoff_halfwidth = 0.0;
};

struct SimulateOptions {
  std::uint64_t max_events = UINT64_MAX;
  const SharingFunction* sharing = nullptr;  // enables the payoff-rate stats
};

// Exact event-driven simulation with competing exponential clocks; the
// arrival/departure/flip rates follow the generator entries. The strategy's
// last column extends to occupancies beyond its range.
TrajectoryStats simulate_location(const ModelParams& params, const ResourceProcess& resource,
                                  const Strategy& strategy, Real kappa, Real horizon,
                                  std::uint64_t seed, const SimulateOptions& options = {});

// Monotone coupling of X1 ~ M/M/inf(lambda, kappa), the location chain N, and
// X2 ~ M/M/inf((1-gamma) lambda, kappa) on one event stream.
struct DominanceReport {
  std::uint64_t events = 0;
  std::uint64_t violations = 0;   // event times where X1 <= N <= X2 failed
  bool sandwich_held = true;
  Real time_avg_lower = 0.0;
  Real time_avg_mid = 0.0;
  Real time_avg_upper = 0.0;
  bool lower_always_equal = true;  // N identical to X1 throughout
  bool upper_always_equal = true;  // N identical to X2 throughout
};

DominanceReport simulate_coupled_dominance(const ModelParams& params,
                                           const ResourceProcess& resource,
                                           const Strategy& strategy, Real kappa, Real horizon,
                                           std::uint64_t seed);

// Pairwise coupling of two location chains driven by the dominating chain's
// event stream with thinning, for stay-probabilities xi_upper >= xi_lower
// pointwise and kappa_upper >= kappa_lower.
struct PairDominanceReport {
  std::uint64_t events = 0;
  std::uint64_t violations = 0;
  bool dominated = true;  // N_lower <= N_upper at every event time
  Real time_avg_lower = 0.0;
  Real time_avg_upper = 0.0;
};

PairDominanceReport simulate_coupled_pair(const ModelParams& params,
                                          const ResourceProcess& resource,
                                          const Strategy& xi_lower, Real kappa_lower,
                                          const Strategy& xi_upper, Real kappa_upper,
                                          Real horizon, std::uint64_t seed);

// Finite system of K locations and round(beta*K) agents (Appendix-A style
// validator): independent resource chains, per-agent Poisson decision clocks,
// uniform rerouting on switches, death with probability 1-gamma per epoch,
// uniform replacement of dead agents.
struct FiniteSystemStats {
  int locations = 0;
  int agents = 0;
  Real horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  Real occupancy_mean = 0.0;        // time-and-location average occupancy
  Matrix empirical;                 // joint (z, n) occupancy-time frequencies
  long switch_samples = 0;
  Real post_switch_payoff_mean = 0.0;  // realized lifetime payoff after a switch
  Real post_switch_payoff_halfwidth = 0.0;
};

FiniteSystemStats simulate_finite_system(int K, const ModelParams& params,
                                         const ResourceProcess& resource,
                                         const Strategy& strategy,
                                         const SharingFunction& sharing, Real horizon,
                                         std::uint64_t seed);

}  // namespace nomad
