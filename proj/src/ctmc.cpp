#include "nomad/ctmc.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <vector>

#include "nomad/blocktri.hpp"

namespace nomad {

namespace {

Real departure_rate(const ModelParams& p, const Strategy& xi, int z, int n) {
  return p.lambda * n * (1.0 - p.gamma * xi(z, n));
}

// Level matrices of the generator seen as a quasi-birth-death chain in the
// occupancy count: within-level resource flips, arrivals up, departures down.
struct LevelView {
  std::vector<Matrix> up, down, local;
};

LevelView level_matrices(const Generator& g) {
  const int Z = g.resource.size();
  const int L = g.L;
  LevelView v;
  v.up.assign(L - 1, Matrix::Identity(Z, Z) * g.kappa);
  v.down.resize(L - 1);
  v.local.resize(L);
  Matrix flips = g.resource.rates;
  flips.diagonal().setZero();
  for (int n = 0; n < L; ++n) {
    Matrix loc = flips;
    for (int z = 0; z < Z; ++z) {
      const Real dep = departure_rate(g.params, g.strategy, z, n);
      const Real arr = (n < L - 1) ? g.kappa : 0.0;
      loc(z, z) = -(g.resource.out_rate(z) + arr + dep);
    }
    v.local[n] = loc;
  }
  for (int n = 1; n < L; ++n) {
    Matrix d = Matrix::Zero(Z, Z);
    for (int z = 0; z < Z; ++z) d(z, z) = departure_rate(g.params, g.strategy, z, n);
    v.down[n - 1] = d;
  }
  return v;
}

Real stationarity_residual(const Generator& g, const Vector& pi) {
  Vector defect = g.Q.transpose() * pi;
  return defect.lpNorm<Eigen::Infinity>();
}

Real occupancy_of(const Vector& pi, int Z, int L) {
  Real phi = 0.0;
  for (int z = 0; z < Z; ++z)
    for (int n = 1; n < L; ++n) phi += n * pi(z * L + n);
  return phi;
}

// Reorders between the public z*L+n layout and the level-stacked n*Z+z
// layout used by the block solvers.
Vector level_to_flat(const Vector& by_level, int Z, int L) {
  Vector flat(Z * L);
  for (int n = 0; n < L; ++n)
    for (int z = 0; z < Z; ++z) flat(z * L + n) = by_level(n * Z + z);
  return flat;
}

}  // namespace

Generator build_generator(const ModelParams& params, const ResourceProcess& resource,
                          const Strategy& strategy, Real kappa, int L) {
  params.validate();
  if (L < 2) throw TruncationTooSmall("truncation level must satisfy L >= 2");
  if (kappa < 0.0) throw InvalidParameter("arrival rate must be nonnegative");
  if (strategy.num_states() != resource.size())
    throw DimensionMismatch("strategy and resource process disagree on state count");
  if (strategy.L() < L - 1)
    throw DimensionMismatch("strategy must cover occupancies 0..L-1");

  Generator g;
  g.L = L;
  g.kappa = kappa;
  g.params = params;
  g.resource = resource;
  g.strategy = strategy;

  const int Z = resource.size();
  const int S = Z * L;
  std::vector<Eigen::Triplet<Real>> trip;
  trip.reserve(static_cast<size_t>(S) * (Z + 3));
  for (int z = 0; z < Z; ++z) {
    for (int n = 0; n < L; ++n) {
      const int from = g.index(z, n);
      Real out = 0.0;
      for (int y = 0; y < Z; ++y) {
        if (y == z) continue;
        trip.emplace_back(from, g.index(y, n), resource.rates(z, y));
        out += resource.rates(z, y);
      }
      if (n < L - 1) {
        trip.emplace_back(from, g.index(z, n + 1), kappa);
        out += kappa;
      }
      if (n >= 1) {
        const Real dep = departure_rate(params, strategy, z, n);
        trip.emplace_back(from, g.index(z, n - 1), dep);
        out += dep;
      }
      trip.emplace_back(from, from, -out);
    }
  }
  g.Q.resize(S, S);
  g.Q.setFromTriplets(trip.begin(), trip.end());
  return g;
}

StationarySolution steady_state(const Generator& g) {
  const int Z = g.resource.size();
  const int L = g.L;

  StationarySolution sol;
  sol.kappa = g.kappa;
  sol.L = L;
  sol.Z = Z;

  const LevelView lv = level_matrices(g);
  bool solved = false;
  try {
    sol.pi = level_to_flat(qbd_stationary<Real>(lv.up, lv.down, lv.local), Z, L);
    sol.residual = stationarity_residual(g, sol.pi);
    solved = sol.residual <= 1e-10;
  } catch (const SingularSystem&) {
    solved = false;
  }
  if (!solved) {
    sol.pi = steady_state_sparse_lu(g);
    sol.residual = stationarity_residual(g, sol.pi);
  }
  if (sol.residual > 1e-10) {
    sol.pi = steady_state_power_iteration(g);
    sol.residual = stationarity_residual(g, sol.pi);
    if (sol.residual > 1e-10)
      throw SingularSystem("stationary solve failed to reach residual 1e-10");
  }
  sol.phi = occupancy_of(sol.pi, Z, L);
  return sol;
}

Real expected_occupancy(const StationarySolution& sol) { return sol.phi; }

Vector steady_state_sparse_lu(const Generator& g) {
  const int S = g.num_states();
  // Balance system pi * Q = 0 with one equation replaced by sum(pi) = 1,
  // i.e. one column of Q replaced by ones before transposing.
  Eigen::SparseMatrix<Real> a = g.Q;
  std::vector<Eigen::Triplet<Real>> trip;
  trip.reserve(a.nonZeros() + S);
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<Real>::InnerIterator it(a, k); it; ++it)
      if (it.col() != S - 1) trip.emplace_back(it.row(), it.col(), it.value());
  for (int r = 0; r < S; ++r) trip.emplace_back(r, S - 1, 1.0);
  Eigen::SparseMatrix<Real> replaced(S, S);
  replaced.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<Real> at = replaced.transpose();
  at.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<Real>> lu;
  lu.analyzePattern(at);
  lu.factorize(at);
  if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
  Vector rhs = Vector::Zero(S);
  rhs(S - 1) = 1.0;
  Vector pi = lu.solve(rhs);
  if (!pi.allFinite()) throw SingularSystem("sparse LU solve produced non-finite values");
  pi = pi.cwiseMax(0.0);
  const Real total = pi.sum();
  if (!(total > 0.0)) throw SingularSystem("sparse LU stationary vector has no mass");
  return pi / total;
}

Vector steady_state_power_iteration(const Generator& g, Real tol, long max_iterations) {
  const int S = g.num_states();
  Real max_diag = 0.0;
  for (int k = 0; k < S; ++k) max_diag = std::max(max_diag, -g.Q.coeff(k, k));
  const Real unif = max_diag * 1.05;
  if (!(unif > 0.0)) throw SingularSystem("degenerate generator in power iteration");

  // pi_{k+1} = pi_k (I + Q / unif)
  Eigen::SparseMatrix<Real> pt = g.Q.transpose();
  Vector pi = Vector::Constant(S, 1.0 / S);
  Vector next(S);
  for (long it = 0; it < max_iterations; ++it) {
    next = pi + (pt * pi) / unif;
    next = next.cwiseMax(0.0);
    next /= next.sum();
    const Real delta = (next - pi).lpNorm<Eigen::Infinity>();
    pi.swap(next);
    if (delta <= tol) return pi;
  }
  throw NonConvergence("uniformized power iteration did not converge");
}

KappaSolveResult solve_kappa(const ModelParams& params, const ResourceProcess& resource,
                             const Strategy& strategy, int L, Real eps1) {
  params.validate();
  if (!(eps1 > 0.0)) throw InvalidParameter("eps1 must be > 0");

  const Real beta = params.beta;
  Real lo = beta * params.lambda * (1.0 - params.gamma);
  Real hi = beta * params.lambda;

  auto evaluate = [&](Real kappa) {
    return steady_state(build_generator(params, resource, strategy, kappa, L));
  };

  KappaSolveResult res;
  StationarySolution at_lo = evaluate(lo);
  if (std::abs(at_lo.phi - beta) <= eps1) {
    res.kappa = lo;
    res.solution = std::move(at_lo);
    return res;
  }
  StationarySolution at_hi = evaluate(hi);
  if (std::abs(at_hi.phi - beta) <= eps1) {
    res.kappa = hi;
    res.solution = std::move(at_hi);
    return res;
  }
  if ((at_lo.phi - beta) * (at_hi.phi - beta) > 0.0)
    throw NoBracket("phi - beta has the same sign at both bisection endpoints; L too small");

  for (int it = 1; it <= 200; ++it) {
    const Real mid = 0.5 * (lo + hi);
    StationarySolution at_mid = evaluate(mid);
    res.iterations = it;
    if (std::abs(at_mid.phi - beta) <= eps1) {
      res.kappa = mid;
      res.solution = std::move(at_mid);
      return res;
    }
    if (at_mid.phi < beta)
      lo = mid;
    else
      hi = mid;
  }
  throw NonConvergence("kappa bisection did not meet eps1 within 200 iterations");
}

Real poisson_tail_above(int n, Real mean) {
  if (mean <= 0.0) return 0.0;
  if (n < 0) return 1.0;
  // P(X <= n) accumulated around the largest term, in log space.
  Real log_cdf = -std::numeric_limits<Real>::infinity();
  for (int j = 0; j <= n; ++j) {
    const Real log_term = -mean + j * std::log(mean) - std::lgamma(j + 1.0);
    const Real hi = std::max(log_cdf, log_term);
    log_cdf = hi + std::log(std::exp(log_cdf - hi) + std::exp(log_term - hi));
  }
  const Real cdf = std::exp(log_cdf);
  if (cdf >= 1.0) {
    // Re-sum the complement directly when the cdf saturates.
    Real tail = 0.0;
    Real log_term = -mean + (n + 1) * std::log(mean) - std::lgamma(n + 2.0);
    Real term = std::exp(log_term);
    for (int j = n + 1; term > 0.0 && j < n + 2000000; ++j) {
      tail += term;
      term *= mean / (j + 1);
      if (term < tail * 1e-18) break;
    }
    return tail;
  }
  return 1.0 - cdf;
}

Real truncation_tail_mass(const ModelParams& params, int L) {
  return poisson_tail_above(L - 1, params.beta / (1.0 - params.gamma));
}

}  // namespace nomad
