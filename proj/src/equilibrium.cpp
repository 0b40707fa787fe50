#include "nomad/equilibrium.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "nomad/parallel.hpp"

namespace nomad {

namespace {

Real simplex_diameter(const std::vector<Vector>& pts) {
  Real d = 0.0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      d = std::max(d, (pts[i] - pts[j]).lpNorm<Eigen::Infinity>());
  return d;
}

}  // namespace

NelderMeadResult nelder_mead_minimize(const std::function<Real(const Vector&)>& objective,
                                      const Vector& start, const Vector& lo, const Vector& hi,
                                      const NelderMeadOptions& options) {
  const int dim = static_cast<int>(start.size());
  long evaluations = 0;
  auto clamped_eval = [&](Vector& p) {
    p = p.cwiseMax(lo).cwiseMin(hi);
    ++evaluations;
    return objective(p);
  };

  // Initial simplex: start plus an offset of 5% of the box width along each
  // axis, stepping inward when the start sits on the upper face.
  std::vector<Vector> pts(dim + 1, start);
  std::vector<Real> val(dim + 1);
  pts[0] = pts[0].cwiseMax(lo).cwiseMin(hi);
  val[0] = clamped_eval(pts[0]);
  for (int d = 0; d < dim; ++d) {
    const Real h = 0.05 * (hi(d) - lo(d));
    Vector p = pts[0];
    p(d) = (p(d) + h <= hi(d)) ? p(d) + h : p(d) - h;
    pts[d + 1] = p;
    val[d + 1] = clamped_eval(pts[d + 1]);
  }

  std::vector<int> order(dim + 1);
  int iterations = 0;
  for (; iterations < options.max_iterations; ++iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    const int best = order[0], worst = order[dim], second_worst = order[dim - 1];

    if (simplex_diameter(pts) < options.diameter_tol ||
        val[worst] - val[best] < options.spread_tol)
      break;

    Vector centroid = Vector::Zero(dim);
    for (int i = 0; i <= dim; ++i)
      if (i != worst) centroid += pts[i];
    centroid /= dim;

    Vector reflected = centroid + options.reflect * (centroid - pts[worst]);
    const Real f_reflected = clamped_eval(reflected);
    if (f_reflected < val[best]) {
      Vector expanded = centroid + options.expand * (reflected - centroid);
      const Real f_expanded = clamped_eval(expanded);
      if (f_expanded < f_reflected) {
        pts[worst] = expanded;
        val[worst] = f_expanded;
      } else {
        pts[worst] = reflected;
        val[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < val[second_worst]) {
      pts[worst] = reflected;
      val[worst] = f_reflected;
      continue;
    }
    // Contraction, outside or inside of the worst vertex.
    if (f_reflected < val[worst]) {
      Vector contracted = centroid + options.contract * (reflected - centroid);
      const Real f_contracted = clamped_eval(contracted);
      if (f_contracted <= f_reflected) {
        pts[worst] = contracted;
        val[worst] = f_contracted;
        continue;
      }
    } else {
      Vector contracted = centroid - options.contract * (centroid - pts[worst]);
      const Real f_contracted = clamped_eval(contracted);
      if (f_contracted < val[worst]) {
        pts[worst] = contracted;
        val[worst] = f_contracted;
        continue;
      }
    }
    // Shrink toward the best vertex.
    for (int i = 0; i <= dim; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + options.shrink * (pts[i] - pts[best]);
      val[i] = clamped_eval(pts[i]);
    }
  }

  int best = 0;
  for (int i = 1; i <= dim; ++i)
    if (val[i] < val[best]) best = i;
  NelderMeadResult res;
  res.point = pts[best];
  res.value = val[best];
  res.iterations = iterations;
  res.evaluations = evaluations;
  return res;
}

MfeProblem::MfeProblem(ModelParams params, ResourceProcess resource, SharingFunction sharing,
                       SolverConfig config)
    : params_(std::move(params)),
      resource_(std::move(resource)),
      sharing_(std::move(sharing)),
      config_(std::move(config)) {
  params_.validate();
  if (!sharing_.decreasing)
    throw InvalidParameter("equilibrium search requires a decreasing sharing function");
  bounds_ = value_bounds(params_, resource_, sharing_, config_.L);
}

PipelineEvaluation MfeProblem::evaluate(const ThresholdVector& x, Real V_sw) const {
  PipelineEvaluation ev;
  ev.x = x;
  ev.V_sw = V_sw;
  const Strategy strategy = strategy_from_threshold(x, config_.L);
  KappaSolveResult k = solve_kappa(params_, resource_, strategy, config_.L, config_.eps1);
  ev.kappa = k.kappa;
  ev.solution = std::move(k.solution);
  ev.values = value_iterate(params_, resource_, strategy, sharing_, ev.kappa, V_sw, config_.L,
                            config_.eps0);
  ev.v_sw_implied = switch_value(ev.solution, ev.values);
  ev.intervals = optimal_threshold_set(ev.values, V_sw, config_.indifference());
  ev.value_gap = std::abs(V_sw - ev.v_sw_implied);
  Real gap2 = 0.0;
  for (int z = 0; z < resource_.size(); ++z) {
    const Real d = ev.intervals.clamp_distance(z, x.x(z));
    gap2 += d * d;
  }
  ev.threshold_gap = std::sqrt(gap2);
  ev.dist = ev.value_gap + ev.threshold_gap;
  return ev;
}

Real MfeProblem::distance(const ThresholdVector& x, Real V_sw) const {
  return evaluate(x, V_sw).dist;
}

namespace {

// Multi-start state shared by the refinement rounds.
struct Candidate {
  Vector point;  // (x..., scaled V_sw)
  Real value = std::numeric_limits<Real>::infinity();
  long start_index = 0;

  bool better_than(const Candidate& other) const {
    if (value != other.value) return value < other.value;
    if (start_index != other.start_index) return start_index < other.start_index;
    return std::lexicographical_compare(point.begin(), point.end(), other.point.begin(),
                                        other.point.end());
  }
};

}  // namespace

EquilibriumResult solve_mfe(const ModelParams& params, const ResourceProcess& resource,
                            const SharingFunction& sharing, const SolverConfig& config) {
  const MfeProblem problem(params, resource, sharing, config);
  const int Z = resource.size();
  const int dim = Z + 1;
  const Real x_max = static_cast<Real>(config.L - 1);
  const Real v_lo = problem.bounds().search_lower();
  const Real v_hi = problem.bounds().upper;
  const Real v_span = std::max(v_hi - v_lo, std::numeric_limits<Real>::min());

  // Search space: thresholds in their natural units, the switching payoff
  // rescaled to [0, 1] so all simplex coordinates have comparable magnitude.
  Vector lo = Vector::Zero(dim), hi = Vector::Zero(dim);
  for (int z = 0; z < Z; ++z) hi(z) = x_max;
  hi(Z) = 1.0;

  std::atomic<long> total_evaluations{0};
  auto objective = [&](const Vector& p) {
    ThresholdVector x;
    x.x = p.head(Z);
    const Real v_sw = v_lo + p(Z) * v_span;
    total_evaluations.fetch_add(1, std::memory_order_relaxed);
    return problem.distance(x, v_sw);
  };

  EquilibriumResult result;
  result.bounds = problem.bounds();
  Candidate best;
  int restarts_used = 0;
  int rounds_used = 0;

  int k = config.k;
  for (int round = 0; round <= config.max_refinements; ++round, k *= 2) {
    rounds_used = round;
    // Grid of k+1 points per dimension.
    const long grid_points = static_cast<long>(std::pow(k + 1, dim));
    std::vector<Candidate> starts(grid_points);
    const std::function<Candidate(int)> screen = [&](int idx) {
      Candidate c;
      c.start_index = idx;
      c.point = Vector::Zero(dim);
      long rem = idx;
      for (int d = 0; d < dim; ++d) {
        const long j = rem % (k + 1);
        rem /= (k + 1);
        c.point(d) = (d < Z) ? x_max * static_cast<Real>(j) / k
                             : static_cast<Real>(j) / k;
      }
      try {
        c.value = objective(c.point);
      } catch (const SolverError&) {
        c.value = std::numeric_limits<Real>::infinity();
      }
      return c;
    };
    starts = parallel_map<Candidate>(static_cast<int>(grid_points), config.threads, screen);

    std::stable_sort(starts.begin(), starts.end(),
                     [](const Candidate& a, const Candidate& b) { return a.better_than(b); });
    const int n_runs = std::min<long>(config.max_restarts, grid_points);

    for (int r = 0; r < n_runs; ++r) {
      if (!std::isfinite(starts[r].value)) break;
      NelderMeadResult nm;
      try {
        nm = nelder_mead_minimize(objective, starts[r].point, lo, hi, config.nelder_mead);
      } catch (const SolverError&) {
        continue;
      }
      ++restarts_used;
      Candidate c;
      c.point = nm.point;
      c.value = nm.value;
      c.start_index = starts[r].start_index;
      if (c.better_than(best)) best = c;
      if (config.early_exit && best.value <= config.eps2) break;
    }
    if (best.value <= config.eps2) break;
  }

  result.restarts_used = restarts_used;
  result.refinements_used = rounds_used;
  if (!std::isfinite(best.value))
    throw SolverError("all equilibrium starts failed to evaluate");

  ThresholdVector x_star;
  x_star.x = best.point.head(Z);
  const Real v_star = v_lo + best.point(Z) * v_span;
  PipelineEvaluation ev = problem.evaluate(x_star, v_star);
  result.x_star = ev.x;
  result.V_sw_star = ev.V_sw;
  result.kappa_star = ev.kappa;
  result.pi_star = ev.solution.pi;
  result.phi = ev.solution.phi;
  result.value_functions = std::move(ev.values);
  result.intervals = ev.intervals;
  result.dist_value = ev.dist;
  result.value_gap = ev.value_gap;
  result.threshold_gap = ev.threshold_gap;
  result.evaluations = total_evaluations.load();
  result.accepted = result.dist_value <= config.eps2;
  return result;
}

ValidationReport validate_equilibrium(const MfeProblem& problem, const ThresholdVector& x,
                                      Real V_sw, Real eps2) {
  ValidationReport rep;
  PipelineEvaluation ev = problem.evaluate(x, V_sw);
  rep.dist = ev.dist;
  rep.value_gap = ev.value_gap;
  rep.threshold_gap = ev.threshold_gap;
  rep.occupancy_gap = std::abs(ev.solution.phi - problem.params().beta);

  const SharingFunction& f = problem.sharing();
  const Real gamma = problem.params().gamma;
  Real bellman = 0.0, mono = 0.0;
  for (int z = 0; z < ev.values.num_states(); ++z) {
    for (int n = 1; n <= ev.values.L(); ++n) {
      const Real rhs = eval_sharing(f, z, n) + gamma * std::max(ev.values.stay(z, n), V_sw);
      bellman = std::max(bellman, std::abs(ev.values.value(z, n) - rhs));
      if (n < ev.values.L())
        mono = std::max(mono, ev.values.stay(z, n + 1) - ev.values.stay(z, n));
    }
  }
  rep.bellman_residual = bellman;
  rep.monotonicity_defect = std::max(mono, 0.0);
  rep.truncation_tail = truncation_tail_mass(problem.params(), problem.config().L);
  rep.accepted = rep.dist <= eps2;
  return rep;
}

}  // namespace nomad
