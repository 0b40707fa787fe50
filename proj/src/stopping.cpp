#include "nomad/stopping.hpp"

#include <cmath>
#include <limits>

namespace nomad {

StayOperator::StayOperator(const ModelParams& params, const ResourceProcess& resource,
                           const Strategy& strategy, Real kappa, int L)
    : Z_(resource.size()), L_(L), lambda_(params.lambda) {
  params.validate();
  if (L < 2) throw TruncationTooSmall("truncation level must satisfy L >= 2");
  if (strategy.L() < L) throw DimensionMismatch("strategy must cover occupancies 0..L");
  if (strategy.num_states() != Z_)
    throw DimensionMismatch("strategy and resource process disagree on state count");

  // Unknowns V_st(z, n), n = 1..L, level-stacked by n. The system reads
  //   D(z,n) V_st(z,n) - offdiagonal couplings = lambda * V(z,n)
  // with D(z,n) = n lambda + kappa 1{n<L} + sum_y mu_zy, minus the removable
  // competitor-stays self loop on the diagonal. Strict diagonal dominance by
  // lambda makes the factorization stable.
  std::vector<Matrix> diag(L), lower(L - 1), upper(L - 1);
  Matrix flips = resource.rates;
  flips.diagonal().setZero();
  for (int n = 1; n <= L; ++n) {
    Matrix d = -flips;
    for (int z = 0; z < Z_; ++z) {
      const Real xi = strategy(z, n);
      const Real arrivals = (n < L) ? kappa : 0.0;
      const Real competitors = (n - 1) * params.lambda;
      d(z, z) = n * params.lambda + arrivals + resource.out_rate(z) -
                competitors * params.gamma * xi;
      if (n >= 2) {
        if (z == 0) lower[n - 2] = Matrix::Zero(Z_, Z_);
        lower[n - 2](z, z) = -competitors * (1.0 - params.gamma * xi);
      }
    }
    diag[n - 1] = d;
    if (n < L) upper[n - 1] = Matrix::Identity(Z_, Z_) * (-kappa);
  }
  system_.factor(diag, lower, upper);
}

Matrix StayOperator::apply(const Matrix& V) const {
  if (V.rows() != Z_ || V.cols() != L_)
    throw DimensionMismatch("value matrix has wrong shape for the stay operator");
  Vector rhs(Z_ * L_);
  for (int n = 0; n < L_; ++n)
    for (int z = 0; z < Z_; ++z) rhs(n * Z_ + z) = lambda_ * V(z, n);
  system_.solve(rhs);
  Matrix out(Z_, L_);
  for (int n = 0; n < L_; ++n)
    for (int z = 0; z < Z_; ++z) out(z, n) = rhs(n * Z_ + z);
  return out;
}

Matrix bellman_sweep(const StayOperator& stay, const SharingFunction& sharing, Real gamma,
                     Real V_sw, const Matrix& V) {
  const Matrix v_st = stay.apply(V);
  Matrix out(V.rows(), V.cols());
  for (int z = 0; z < V.rows(); ++z)
    for (int j = 0; j < V.cols(); ++j)
      out(z, j) = eval_sharing(sharing, z, j + 1) + gamma * std::max(v_st(z, j), V_sw);
  return out;
}

ValueFunctions value_iterate(const ModelParams& params, const ResourceProcess& resource,
                             const Strategy& strategy, const SharingFunction& sharing, Real kappa,
                             Real V_sw, int L, Real eps0, long max_sweeps) {
  if (!(eps0 > 0.0)) throw InvalidParameter("eps0 must be > 0");
  const StayOperator stay(params, resource, strategy, kappa, L);
  const int Z = resource.size();

  Matrix payoff(Z, L);
  for (int z = 0; z < Z; ++z)
    for (int j = 0; j < L; ++j) payoff(z, j) = eval_sharing(sharing, z, j + 1);

  // Stop when successive sweeps differ by eps0 (1-gamma)/gamma in sup norm;
  // the gamma-contraction then puts the iterate within eps0 of the limit.
  const Real threshold = eps0 * (1.0 - params.gamma) / params.gamma;
  Matrix v = (payoff.array() + params.gamma * V_sw).matrix();  // immediate switching
  ValueFunctions out;
  Real delta = std::numeric_limits<Real>::infinity();
  long sweeps = 0;
  while (sweeps < max_sweeps) {
    Matrix next = bellman_sweep(stay, sharing, params.gamma, V_sw, v);
    ++sweeps;
    delta = (next - v).lpNorm<Eigen::Infinity>();
    v.swap(next);
    if (delta <= threshold) break;
  }
  if (delta > threshold)
    throw NonConvergence("value iteration exhausted its sweep budget");

  out.V_st = stay.apply(v);
  out.V.resize(Z, L);
  for (int z = 0; z < Z; ++z)
    for (int j = 0; j < L; ++j)
      out.V(z, j) = payoff(z, j) + params.gamma * std::max(out.V_st(z, j), V_sw);
  out.iterations = sweeps;
  out.final_delta = delta;
  return out;
}

Real switch_value(const StationarySolution& sol, const ValueFunctions& vf) {
  if (vf.L() < sol.L) throw DimensionMismatch("V_st must cover n = 1..L");
  Real total = 0.0;
  for (int z = 0; z < sol.Z; ++z)
    for (int n = 0; n < sol.L; ++n) total += sol(z, n) * vf.stay(z, n + 1);
  return total;
}

ThresholdIntervals optimal_threshold_set(const ValueFunctions& vf, Real V_sw, Real eps) {
  const int Z = vf.num_states();
  const int L = vf.L();
  for (int z = 0; z < Z; ++z)
    for (int n = 1; n < L; ++n)
      if (vf.stay(z, n + 1) > vf.stay(z, n) + 1e-8)
        throw MonotonicityViolation(
            "continuation values are not non-increasing in the occupancy; "
            "either eps0 is too loose or the sharing function is not decreasing");

  ThresholdIntervals intervals;
  intervals.lower = Vector::Zero(Z);
  intervals.upper = Vector::Zero(Z);
  for (int z = 0; z < Z; ++z) {
    int last_strict = 0;  // largest n with V_st(z,n) > V_sw + eps
    int last_weak = 0;    // largest n with V_st(z,n) >= V_sw - eps
    for (int n = 1; n <= L; ++n) {
      if (vf.stay(z, n) > V_sw + eps) last_strict = n;
      if (vf.stay(z, n) >= V_sw - eps) last_weak = n;
    }
    const Real cap = static_cast<Real>(L - 1);
    intervals.lower(z) = std::min(static_cast<Real>(last_strict == 0 ? 0 : 1 + last_strict), cap);
    intervals.upper(z) = std::min(static_cast<Real>(last_weak == 0 ? 0 : 1 + last_weak), cap);
    if (intervals.lower(z) > intervals.upper(z)) intervals.upper(z) = intervals.lower(z);
  }
  return intervals;
}

ValueBounds value_bounds(const ModelParams& params, const ResourceProcess& resource,
                         const SharingFunction& sharing, int L) {
  params.validate();
  ValueBounds b;
  b.upper = sup_norm(sharing, L) / (1.0 - params.gamma);

  const int Z = resource.size();
  Real psi = 0.0;
  for (int z = 0; z < Z; ++z) psi = std::max(psi, resource.out_rate(z));
  psi /= params.lambda;

  // V_lower = exp(-beta/(1-gamma)) sum_n beta^n (1-gamma)^n /
  //           ((1+beta+Psi)^{n+1} (n+1)!) sum_z pi_res(z) F(z, n+1)
  const Real beta = params.beta;
  const Real ratio = beta * (1.0 - params.gamma) / (1.0 + beta + psi);
  const int n_max = (sharing.kind == SharingFunction::Kind::table)
                        ? static_cast<int>(sharing.table.cols()) - 1
                        : std::numeric_limits<int>::max();
  Real coeff = std::exp(-beta / (1.0 - params.gamma)) / (1.0 + beta + psi);
  Real sum = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    Real mix = 0.0;
    for (int z = 0; z < Z; ++z) mix += resource.stationary(z) * eval_sharing(sharing, z, n + 1);
    const Real term = coeff * mix;
    sum += term;
    if (term < 1e-15 * sum && n > 0) break;
    coeff *= ratio / (n + 2);
    if (coeff == 0.0) break;
  }
  b.lower = sum;
  b.lower_underflowed = !(sum > 0.0);
  return b;
}

}  // namespace nomad
