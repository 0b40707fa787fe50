#include <doctest.h>

#include <cmath>

#include "nomad/ctmc.hpp"
#include "nomad/rng.hpp"
#include "oracles.hpp"

using namespace nomad;

namespace {

ModelParams params_of(Real lambda, Real gamma, Real beta) {
  ModelParams p;
  p.lambda = lambda;
  p.gamma = gamma;
  p.beta = beta;
  return p;
}

ResourceProcess single_state() {
  // Self-contained one-state chain; the rate matrix has no off-diagonals.
  return make_resource_process({"z"}, Matrix::Zero(1, 1));
}

Vector truncated_poisson(Real mean, int L) {
  Vector p(L);
  for (int n = 0; n < L; ++n)
    p(n) = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
  return p / p.sum();
}

Strategy random_strategy(int Z, int L, Rng& rng) {
  Strategy s;
  s.stay_prob.resize(Z, L + 1);
  for (int z = 0; z < Z; ++z) {
    s.stay_prob(z, 0) = 1.0;
    for (int n = 1; n <= L; ++n) s.stay_prob(z, n) = rng.uniform01();
  }
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("ctmc");

TEST_CASE("ctmc: generator structure") {
  SUBCASE("birth-death when nobody stays") {
    ModelParams p = params_of(1.0, 0.95, 20.0);
    Generator g = build_generator(p, single_state(), make_constant_strategy(1, 8, 0.0), 2.0, 8);
    for (int n = 0; n < 8; ++n) {
      if (n < 7) CHECK(g.Q.coeff(n, n + 1) == doctest::Approx(2.0));
      if (n >= 1) CHECK(g.Q.coeff(n, n - 1) == doctest::Approx(1.0 * n));
    }
  }
  SUBCASE("resource flips are occupancy-independent") {
    ModelParams p = params_of(1.0, 0.9, 5.0);
    ResourceProcess res = make_binary_resource(0.7, 1.3);
    Generator g = build_generator(p, res, make_constant_strategy(2, 6, 0.5), 1.0, 6);
    for (int n = 0; n < 6; ++n) {
      CHECK(g.Q.coeff(g.index(0, n), g.index(1, n)) == doctest::Approx(0.7));
      CHECK(g.Q.coeff(g.index(1, n), g.index(0, n)) == doctest::Approx(1.3));
    }
  }
  SUBCASE("departure rate matches lambda n (1 - gamma xi)") {
    ModelParams p = params_of(1.0, 0.95, 5.0);
    Generator g = build_generator(p, single_state(), make_constant_strategy(1, 8, 0.5), 1.0, 8);
    CHECK(g.Q.coeff(4, 3) == doctest::Approx(4.0 * (1.0 - 0.475)).epsilon(1e-14));
    CHECK(g.Q.coeff(4, 3) == doctest::Approx(2.1).epsilon(1e-14));
  }
  SUBCASE("L below 2 is rejected") {
    ModelParams p = params_of(1.0, 0.9, 1.0);
    CHECK_THROWS_AS(build_generator(p, single_state(), make_constant_strategy(1, 1, 0.0), 1.0, 1),
                    TruncationTooSmall);
  }
}

TEST_CASE("ctmc: generator rows sum to zero with correct sign pattern") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const int Z = 1 + static_cast<int>(rng.below(3));
    const int L = 3 + static_cast<int>(rng.below(10));
    Matrix rates = Matrix::Zero(Z, Z);
    for (int z = 0; z < Z; ++z)
      for (int y = 0; y < Z; ++y)
        if (y != z) rates(z, y) = 0.05 + 2.0 * rng.uniform01();
    ResourceProcess res = Z == 1 ? single_state() : make_resource_process({}, rates);
    ModelParams p = params_of(0.2 + 2.0 * rng.uniform01(), 0.5 + 0.45 * rng.uniform01(),
                              1.0 + 10.0 * rng.uniform01());
    Strategy xi = random_strategy(Z, L, rng);
    Generator g = build_generator(p, res, xi, 3.0 * rng.uniform01(), L);

    Vector row_sums = g.Q * Vector::Ones(g.num_states());
    CHECK(row_sums.lpNorm<Eigen::Infinity>() <= 1e-10);
    for (int k = 0; k < g.Q.outerSize(); ++k)
      for (Eigen::SparseMatrix<Real>::InnerIterator it(g.Q, k); it; ++it)
        if (it.row() != it.col()) CHECK(it.value() >= 0.0);
    // arrivals are blocked at the boundary row
    for (int z = 0; z < Z; ++z) {
      const int top = g.index(z, L - 1);
      for (int y = 0; y < Z; ++y)
        for (int n = 0; n < L; ++n)
          if (std::abs(g.Q.coeff(top, g.index(y, n))) > 0)
            CHECK(n <= L - 1);
    }
  }
}

TEST_CASE("ctmc: M/M/inf anchors hit the truncated Poisson law") {
  SUBCASE("everyone leaves: mean kappa/lambda") {
    ModelParams p = params_of(1.0, 0.95, 20.0);
    Generator g = build_generator(p, single_state(), make_constant_strategy(1, 60, 0.0), 2.0, 60);
    StationarySolution sol = steady_state(g);
    Vector ref = truncated_poisson(2.0, 60);
    CHECK((sol.pi - ref).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(sol.pi(0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
    CHECK(sol.residual <= 1e-10);
    CHECK(expected_occupancy(sol) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("everyone stays: mean kappa/(lambda(1-gamma))") {
    ModelParams p = params_of(1.0, 0.5, 20.0);
    Generator g = build_generator(p, single_state(), make_constant_strategy(1, 60, 1.0), 1.0, 60);
    StationarySolution sol = steady_state(g);
    Vector ref = truncated_poisson(2.0, 60);
    CHECK((sol.pi - ref).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("ctmc: steady state matches the dense oracle on a small instance") {
  ModelParams p = params_of(1.0, 0.9, 4.0);
  ResourceProcess res = make_binary_resource(0.5, 0.5);
  ThresholdVector x;
  x.x = Vector(2);
  x.x << 2.0, 5.0;
  Strategy xi = strategy_from_threshold(x, 8);
  Generator g = build_generator(p, res, xi, 1.0, 8);
  StationarySolution sol = steady_state(g);

  Vector ref = oracles::dense_stationary(oracles::dense_generator(p, res, xi, 1.0, 8));
  CHECK((sol.pi - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
  Real phi_ref = 0.0;
  for (int z = 0; z < 2; ++z)
    for (int n = 0; n < 8; ++n) phi_ref += n * ref(z * 8 + n);
  CHECK(expected_occupancy(sol) == doctest::Approx(phi_ref).epsilon(1e-10));

  // point-mass occupancy mean sanity
  StationarySolution point;
  point.pi = Vector::Zero(16);
  point.pi(3) = 1.0;
  point.L = 8;
  point.Z = 2;
  point.phi = 3.0;
  CHECK(expected_occupancy(point) == 3.0);
}

TEST_CASE("ctmc: qbd path agrees with sparse LU and dense oracle on random instances") {
  Rng rng(555);
  for (int trial = 0; trial < 30; ++trial) {
    const int Z = 1 + static_cast<int>(rng.below(3));
    const int L = 4 + static_cast<int>(rng.below(9));
    Matrix rates = Matrix::Zero(Z, Z);
    for (int z = 0; z < Z; ++z)
      for (int y = 0; y < Z; ++y)
        if (y != z) rates(z, y) = 0.05 + 2.0 * rng.uniform01();
    ResourceProcess res = Z == 1 ? single_state() : make_resource_process({}, rates);
    ModelParams p = params_of(0.2 + 2.0 * rng.uniform01(), 0.5 + 0.45 * rng.uniform01(),
                              1.0 + 6.0 * rng.uniform01());
    Strategy xi = random_strategy(Z, L, rng);
    const Real kappa = 0.1 + 4.0 * rng.uniform01();
    Generator g = build_generator(p, res, xi, kappa, L);

    StationarySolution sol = steady_state(g);
    Vector lu = steady_state_sparse_lu(g);
    Vector dense = oracles::dense_stationary(oracles::dense_generator(p, res, xi, kappa, L));
    CHECK((sol.pi - lu).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((sol.pi - dense).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("ctmc: occupancy decouples from the resource chain for z-independent strategies") {
  Rng rng(777);
  ModelParams p = params_of(1.0, 0.9, 4.0);
  ResourceProcess res = make_binary_resource(0.8, 1.7);
  const int L = 12;
  Strategy xi;
  xi.stay_prob.resize(2, L + 1);
  xi.stay_prob(0, 0) = xi.stay_prob(1, 0) = 1.0;
  for (int n = 1; n <= L; ++n) {
    const Real v = rng.uniform01();
    xi.stay_prob(0, n) = v;
    xi.stay_prob(1, n) = v;
  }
  StationarySolution sol = steady_state(build_generator(p, res, xi, 1.3, L));
  Vector occ = Vector::Zero(L);
  for (int z = 0; z < 2; ++z)
    for (int n = 0; n < L; ++n) occ(n) += sol(z, n);
  for (int z = 0; z < 2; ++z)
    for (int n = 0; n < L; ++n)
      CHECK(std::abs(sol(z, n) - res.stationary(z) * occ(n)) <= 1e-9);
}

TEST_CASE("ctmc: phi is nondecreasing in kappa and sandwiched") {
  Rng rng(31);
  ModelParams p = params_of(1.0, 0.8, 6.0);
  ResourceProcess res = make_binary_resource(0.4, 0.9);
  const int L = 40;
  for (int trial = 0; trial < 3; ++trial) {
    Strategy xi = random_strategy(2, L, rng);
    Real prev = -1.0;
    for (int i = 0; i < 20; ++i) {
      const Real kappa = 0.2 + i * (6.0 - 0.2) / 19.0;
      StationarySolution sol = steady_state(build_generator(p, res, xi, kappa, L));
      CHECK(sol.phi >= prev + 1e-9);  // strict increase with margin
      prev = sol.phi;

      const Real upper_mean = kappa / (p.lambda * (1.0 - p.gamma));
      const Real m_l = L * poisson_tail_above(L - 1, upper_mean);
      CHECK(sol.phi >= kappa / p.lambda - m_l - 1e-9);
      CHECK(sol.phi <= upper_mean + 1e-9);
    }
  }
}

TEST_CASE("ctmc: pointwise-larger stay probabilities dominate in steady state") {
  Rng rng(4242);
  ModelParams p = params_of(1.0, 0.85, 4.0);
  ResourceProcess res = make_binary_resource(0.6, 0.6);
  const int L = 25;
  for (int trial = 0; trial < 10; ++trial) {
    Strategy lo = random_strategy(2, L, rng);
    Strategy hi = lo;
    for (int z = 0; z < 2; ++z)
      for (int n = 1; n <= L; ++n)
        hi.stay_prob(z, n) = lo.stay_prob(z, n) + (1.0 - lo.stay_prob(z, n)) * rng.uniform01();
    const Real kappa = 1.0 + 2.0 * rng.uniform01();
    StationarySolution a = steady_state(build_generator(p, res, lo, kappa, L));
    StationarySolution b = steady_state(build_generator(p, res, hi, kappa, L));
    // CDF comparison of the occupancy marginal
    Real cdf_a = 0.0, cdf_b = 0.0;
    for (int n = 0; n < L; ++n) {
      for (int z = 0; z < 2; ++z) {
        cdf_a += a(z, n);
        cdf_b += b(z, n);
      }
      CHECK(cdf_b <= cdf_a + 1e-9);
    }
  }
}

TEST_CASE("ctmc: solve_kappa endpoints and bisection") {
  SUBCASE("always-leave pins kappa at beta lambda") {
    ModelParams p = params_of(1.0, 0.95, 20.0);
    KappaSolveResult r =
        solve_kappa(p, single_state(), make_constant_strategy(1, 600, 0.0), 600, 1e-6);
    CHECK(r.kappa == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(std::abs(r.solution.phi - 20.0) <= 1e-6);
  }
  SUBCASE("always-stay pins kappa at beta lambda (1-gamma)") {
    ModelParams p = params_of(1.0, 0.95, 20.0);
    KappaSolveResult r =
        solve_kappa(p, single_state(), make_constant_strategy(1, 600, 1.0), 600, 1e-6);
    CHECK(r.kappa == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(r.solution.phi - 20.0) <= 1e-6);
  }
  SUBCASE("threshold instance matches a fine scan of phi") {
    ModelParams p = params_of(1.0, 0.95, 4.0);
    ResourceProcess res = make_binary_resource(0.25, 0.25);
    ThresholdVector x;
    x.x = Vector::Constant(2, 5.0);
    Strategy xi = strategy_from_threshold(x, 40);
    KappaSolveResult r = solve_kappa(p, res, xi, 40, 1e-6);
    CHECK(std::abs(r.solution.phi - 4.0) <= 1e-6);

    // Oracle: bracket phi(kappa) = beta coarsely with dense solves, then
    // walk a 1e-5 grid across the bracket.
    Real lo = 4.0 * 0.05, hi = 4.0;
    Real coarse = lo;
    for (Real kappa = lo; kappa <= hi + 1e-12; kappa += 0.02) {
      if (oracles::dense_phi(p, res, xi, kappa, 40) >= 4.0) break;
      coarse = kappa;
    }
    Real scan = coarse;
    for (Real kappa = coarse; kappa <= coarse + 0.04; kappa += 1e-5) {
      scan = kappa;
      if (oracles::dense_phi(p, res, xi, kappa, 40) >= 4.0) break;
    }
    CHECK(std::abs(r.kappa - scan) <= 2e-5);
  }
  SUBCASE("too-small truncation loses the bracket") {
    ModelParams p = params_of(1.0, 0.95, 20.0);
    CHECK_THROWS_AS(solve_kappa(p, single_state(), make_constant_strategy(1, 8, 0.0), 8, 1e-6),
                    NoBracket);
  }
}

TEST_CASE("ctmc: poisson tail behaves at both ends") {
  CHECK(poisson_tail_above(60, 2.0) <= 1e-12);
  CHECK(poisson_tail_above(-1, 2.0) == 1.0);
  CHECK(poisson_tail_above(1199, 80000.0) == doctest::Approx(1.0));
  // against a direct small-mean sum
  Real direct = 0.0;
  for (int j = 0; j <= 5; ++j)
    direct += std::exp(-3.0) * std::pow(3.0, j) / std::tgamma(j + 1.0);
  CHECK(poisson_tail_above(5, 3.0) == doctest::Approx(1.0 - direct).epsilon(1e-10));

  ModelParams p = params_of(1.0, 0.95, 20.0);
  CHECK(truncation_tail_mass(p, 600) < 1e-8);
  CHECK(truncation_tail_mass(p, 200) > 1e-8);
}

TEST_SUITE_END();
