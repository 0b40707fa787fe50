#include <doctest.h>

#include "nomad/model.hpp"
#include "nomad/rng.hpp"
#include "oracles.hpp"

using namespace nomad;

TEST_SUITE_BEGIN("model");

TEST_CASE("model: two-state case-study rates give pi_res = (2/3, 1/3)") {
  // mu01 = 1/3.86, mu10 = 1/1.93; closed form mu10/(mu01+mu10) = 2/3.
  ResourceProcess p = make_binary_resource(1.0 / 3.86, 1.0 / 1.93);
  CHECK(p.stationary(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p.stationary(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(p.stationary.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("model: single-state chain is degenerate") {
  Matrix rates = Matrix::Zero(1, 1);
  ResourceProcess p = make_resource_process({"only"}, rates);
  CHECK(p.stationary(0) == 1.0);
}

TEST_CASE("model: three-state chain matches dense balance oracle") {
  Matrix rates(3, 3);
  rates << 0, 1, 2, 3, 0, 4, 5, 6, 0;
  ResourceProcess p = make_resource_process({}, rates);

  // Oracle: dense solve of the global balance system.
  Matrix q = Matrix::Zero(3, 3);
  for (int z = 0; z < 3; ++z)
    for (int y = 0; y < 3; ++y)
      if (y != z) {
        q(z, y) = rates(z, y);
        q(z, z) -= rates(z, y);
      }
  Vector ref = oracles::dense_stationary(q);
  // Frozen from the oracle: (0.563829787234, 0.244680851064, 0.191489361702)
  CHECK(ref(0) == doctest::Approx(0.5638297872340425).epsilon(1e-12));
  CHECK(ref(1) == doctest::Approx(0.2446808510638298).epsilon(1e-12));
  CHECK(ref(2) == doctest::Approx(0.1914893617021277).epsilon(1e-12));
  for (int z = 0; z < 3; ++z) CHECK(p.stationary(z) == doctest::Approx(ref(z)).epsilon(1e-10));

  // Global balance residual within 1e-10.
  for (int y = 0; y < 3; ++y) {
    Real in = 0.0, out = 0.0;
    for (int z = 0; z < 3; ++z) {
      if (z == y) continue;
      in += p.stationary(z) * rates(z, y);
      out += rates(y, z);
    }
    CHECK(std::abs(in - p.stationary(y) * out) <= 1e-10);
  }
}

TEST_CASE("model: stationary law invariant under uniform rate scaling") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const int Z = 2 + static_cast<int>(rng.below(3));
    Matrix rates = Matrix::Zero(Z, Z);
    for (int z = 0; z < Z; ++z)
      for (int y = 0; y < Z; ++y)
        if (y != z) rates(z, y) = 0.05 + 3.0 * rng.uniform01();
    ResourceProcess base = make_resource_process({}, rates);
    const Real c = std::exp(4.0 * (rng.uniform01() - 0.5));
    ResourceProcess scaled = make_resource_process({}, Matrix(c * rates));
    CHECK((base.stationary - scaled.stationary).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("model: non-positive off-diagonal rate is rejected") {
  Matrix rates(2, 2);
  rates << 0, 0.0, 1.0, 0;
  CHECK_THROWS_AS(make_resource_process({}, rates), NonPositiveRate);
  Matrix bad(2, 3);
  CHECK_THROWS_AS(make_resource_process({}, Matrix(bad)), DimensionMismatch);
}

TEST_CASE("model: threshold strategy materialization") {
  const int L = 10;
  SUBCASE("integer threshold") {
    ThresholdVector x;
    x.x = Vector::Constant(1, 3.0);
    Strategy s = strategy_from_threshold(x, L);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(0, 1) == 1.0);
    CHECK(s(0, 2) == 1.0);
    CHECK(s(0, 3) == 0.0);  // fractional part is zero
    CHECK(s(0, 4) == 0.0);
  }
  SUBCASE("fractional threshold mixes at the floor") {
    ThresholdVector x;
    x.x = Vector::Constant(1, 2.4);
    Strategy s = strategy_from_threshold(x, L);
    CHECK(s(0, 1) == 1.0);
    CHECK(s(0, 2) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(s(0, 3) == 0.0);
  }
  SUBCASE("zero threshold still stays at an empty location") {
    ThresholdVector x;
    x.x = Vector::Constant(1, 0.0);
    Strategy s = strategy_from_threshold(x, L);
    CHECK(s(0, 0) == 1.0);
    for (int n = 1; n <= L; ++n) CHECK(s(0, n) == 0.0);
  }
  SUBCASE("out-of-range threshold is rejected") {
    ThresholdVector x;
    x.x = Vector::Constant(1, static_cast<Real>(L));
    CHECK_THROWS_AS(strategy_from_threshold(x, L), OutOfRange);
  }
}

TEST_CASE("model: threshold strategies are monotone in the threshold") {
  Rng rng(1234);
  const int L = 12;
  for (int trial = 0; trial < 50; ++trial) {
    ThresholdVector a, b;
    a.x = Vector::Zero(2);
    b.x = Vector::Zero(2);
    for (int z = 0; z < 2; ++z) {
      a.x(z) = (L - 1) * rng.uniform01();
      b.x(z) = a.x(z) + (L - 1 - a.x(z)) * rng.uniform01();
    }
    Strategy sa = strategy_from_threshold(a, L);
    Strategy sb = strategy_from_threshold(b, L);
    for (int z = 0; z < 2; ++z)
      for (int n = 1; n <= L; ++n) CHECK(sa(z, n) <= sb(z, n) + 1e-15);
  }
}

TEST_CASE("model: sharing evaluation") {
  Vector g(2);
  g << 0.0, 1.0;
  SharingFunction f = make_power_sharing(g, 1.0);
  CHECK(eval_sharing(f, 1, 4) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(eval_sharing(f, 0, 7) == 0.0);
  CHECK_THROWS_AS(eval_sharing(f, 1, 0), OccupancyZero);

  Matrix table(1, 3);
  table << 5.0, 2.0, 2.0;
  SharingFunction t = make_table_sharing(table, true);
  CHECK(eval_sharing(t, 0, 2) == 2.0);
  CHECK_THROWS_AS(eval_sharing(t, 0, 4), OutOfRange);

  Matrix rising(1, 2);
  rising << 1.0, 2.0;
  CHECK_THROWS_AS(make_table_sharing(rising, true), InvalidParameter);
  CHECK_NOTHROW(make_table_sharing(rising, false));
}

TEST_CASE("model: sup norm") {
  Vector g(2);
  g << 0.0, 1.0;
  CHECK(sup_norm(make_power_sharing(g, 1.0), 50) == doctest::Approx(1.0));

  Matrix table = Matrix::Constant(2, 6, 0.7);
  CHECK(sup_norm(make_table_sharing(table, true), 6) == doctest::Approx(0.7));

  // Case-study payoffs: (1 - 0.15) * f(z) with f(1) = 1.2 * 1.2e4, at n = 1.
  Vector fz(2);
  fz << 0.85 * 1.2e4, 0.85 * 1.2 * 1.2e4;
  CHECK(sup_norm(make_power_sharing(fz, 0.5), 400) ==
        doctest::Approx(0.85 * 1.2 * 1.2e4).epsilon(1e-12));
}

TEST_CASE("model: power sharing passes the decreasing check for any L") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Vector g(3);
    for (int z = 0; z < 3; ++z) g(z) = rng.uniform01() * 5.0;
    g(2) += 0.1;  // keep one positive
    const Real alpha = 0.1 + 2.0 * rng.uniform01();
    SharingFunction f = make_power_sharing(g, alpha);
    const int L = 2 + static_cast<int>(rng.below(60));
    for (int z = 0; z < 3; ++z)
      for (int n = 1; n < L; ++n)
        CHECK(eval_sharing(f, z, n + 1) <= eval_sharing(f, z, n) + 1e-15);
  }
}

TEST_CASE("model: parameter validation") {
  ModelParams p;
  p.lambda = 1.0;
  p.gamma = 0.95;
  p.beta = 20.0;
  CHECK_NOTHROW(p.validate());
  p.gamma = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
  p.gamma = 0.5;
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidParameter);
}

TEST_SUITE_END();
