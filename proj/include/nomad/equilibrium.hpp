#pragma once

#include <functional>
#include <optional>

#include "nomad/stopping.hpp"

namespace nomad {

struct NelderMeadOptions {
  Real reflect = 1.0;
  Real expand = 2.0;
  Real contract = 0.5;
  Real shrink = 0.5;
  Real diameter_tol = 1e-10;
  Real spread_tol = 1e-12;
  int max_iterations = 2000;
};

struct NelderMeadResult {
  Vector point;
  Real value = 0.0;
  int iterations = 0;
  long evaluations = 0;
};

// Bounded Nelder-Mead; points are clamped into [lo, hi] before evaluation.
NelderMeadResult nelder_mead_minimize(const std::function<Real(const Vector&)>& objective,
                                      const Vector& start, const Vector& lo, const Vector& hi,
                                      const NelderMeadOptions& options = {});

struct SolverConfig {
  int L = 200;
  int k = 20;
  Real eps0 = 1e-4;  // value-iteration accuracy
  Real eps1 = 1e-6;  // occupancy-consistency tolerance
  Real eps2 = 1e-8;  // acceptance threshold on dist
  Real interval_eps = -1.0;  // indifference tolerance; < 0 means 2 * eps0
  int max_restarts = 64;
  int max_refinements = 3;
  bool early_exit = true;  // stop launching restarts once dist <= eps2
  int threads = 0;         // 0 = respect NOMAD_MFE_THREADS / hardware
  NelderMeadOptions nelder_mead;

  Real indifference() const { return interval_eps < 0.0 ? 2.0 * eps0 : interval_eps; }
};

// One full evaluation of the fixed-point residual at a candidate
// (threshold vector, switching payoff).
struct PipelineEvaluation {
  ThresholdVector x;
  Real V_sw = 0.0;
  Real kappa = 0.0;
  StationarySolution solution;
  ValueFunctions values;
  ThresholdIntervals intervals;
  Real v_sw_implied = 0.0;
  Real value_gap = 0.0;      // |V_sw - implied|
  Real threshold_gap = 0.0;  // euclidean distance of x to its interval box
  Real dist = 0.0;
};

// Shared context for dist evaluations: model primitives plus tolerances.
class MfeProblem {
 public:
  MfeProblem(ModelParams params, ResourceProcess resource, SharingFunction sharing,
             SolverConfig config);

  PipelineEvaluation evaluate(const ThresholdVector& x, Real V_sw) const;
  Real distance(const ThresholdVector& x, Real V_sw) const;

  const ModelParams& params() const { return params_; }
  const ResourceProcess& resource() const { return resource_; }
  const SharingFunction& sharing() const { return sharing_; }
  const SolverConfig& config() const { return config_; }
  const ValueBounds& bounds() const { return bounds_; }

 private:
  ModelParams params_;
  ResourceProcess resource_;
  SharingFunction sharing_;
  SolverConfig config_;
  ValueBounds bounds_;
};

struct EquilibriumResult {
  ThresholdVector x_star;
  Real V_sw_star = 0.0;
  Real kappa_star = 0.0;
  Vector pi_star;
  ValueFunctions value_functions;
  ThresholdIntervals intervals;
  Real dist_value = 0.0;
  Real value_gap = 0.0;
  Real threshold_gap = 0.0;
  Real phi = 0.0;
  ValueBounds bounds;
  int restarts_used = 0;
  int refinements_used = 0;
  long evaluations = 0;
  bool accepted = false;
};

EquilibriumResult solve_mfe(const ModelParams& params, const ResourceProcess& resource,
                            const SharingFunction& sharing, const SolverConfig& config);

struct ValidationReport {
  Real dist = 0.0;
  Real value_gap = 0.0;
  Real threshold_gap = 0.0;
  Real occupancy_gap = 0.0;      // |phi - beta|
  Real bellman_residual = 0.0;   // max |V - (F + gamma max{V_st, V_sw})|
  Real monotonicity_defect = 0.0;
  Real truncation_tail = 0.0;
  bool accepted = false;
};

// Recomputes the whole pipeline from scratch at (x, V_sw).
ValidationReport validate_equilibrium(const MfeProblem& problem, const ThresholdVector& x,
                                      Real V_sw, Real eps2);

}  // namespace nomad
