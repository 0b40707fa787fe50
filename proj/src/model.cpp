#include "nomad/model.hpp"

#include <cmath>

namespace nomad {

namespace {

// Stationary law of a conservative generator: replace one balance equation
// with the normalization constraint and solve densely. The state space here
// is the resource chain, so the system is tiny.
Vector stationary_of_rates(const Matrix& rates) {
  const int n = static_cast<int>(rates.rows());
  if (n == 1) return Vector::Ones(1);

  Matrix a = Matrix::Zero(n, n);  // a = Q^T with one row replaced
  for (int z = 0; z < n; ++z) {
    Real out = 0.0;
    for (int y = 0; y < n; ++y) {
      if (y == z) continue;
      a(y, z) += rates(z, y);
      out += rates(z, y);
    }
    a(z, z) -= out;
  }
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;

  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw SingularSystem("resource balance system is singular");
  Vector pi = lu.solve(rhs);
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return pi;
}

}  // namespace

ResourceProcess make_resource_process(std::vector<std::string> states, Matrix rates) {
  if (rates.rows() != rates.cols())
    throw DimensionMismatch("resource rate matrix must be square");
  if (rates.rows() < 1) throw DimensionMismatch("resource process needs at least one state");
  if (!states.empty() && static_cast<int>(states.size()) != rates.rows())
    throw DimensionMismatch("state labels do not match rate matrix size");

  const int n = static_cast<int>(rates.rows());
  if (states.empty()) {
    for (int z = 0; z < n; ++z) states.push_back(std::to_string(z));
  }
  for (int z = 0; z < n; ++z) {
    rates(z, z) = 0.0;
    for (int y = 0; y < n; ++y) {
      if (y != z && !(rates(z, y) > 0.0))
        throw NonPositiveRate("off-diagonal resource rate mu[" + std::to_string(z) + "][" +
                              std::to_string(y) + "] must be > 0");
    }
  }

  ResourceProcess p;
  p.states = std::move(states);
  p.rates = std::move(rates);
  p.stationary = stationary_of_rates(p.rates);
  return p;
}

ResourceProcess make_binary_resource(Real mu01, Real mu10) {
  Matrix rates(2, 2);
  rates << 0.0, mu01, mu10, 0.0;
  return make_resource_process({"0", "1"}, rates);
}

SharingFunction make_power_sharing(Vector level_payoff, Real alpha) {
  if (!(alpha > 0.0)) throw InvalidParameter("power sharing requires alpha > 0");
  if (level_payoff.size() < 1) throw DimensionMismatch("level payoffs must be non-empty");
  if ((level_payoff.array() < 0.0).any())
    throw InvalidParameter("level payoffs must be nonnegative");
  if (!(level_payoff.maxCoeff() > 0.0))
    throw InvalidParameter("at least one level payoff must be positive");

  SharingFunction f;
  f.kind = SharingFunction::Kind::power;
  f.level_payoff = std::move(level_payoff);
  f.alpha = alpha;
  f.decreasing = true;
  return f;
}

SharingFunction make_table_sharing(Matrix values, bool decreasing) {
  if (values.rows() < 1 || values.cols() < 1)
    throw DimensionMismatch("sharing table must be non-empty");
  if ((values.array() < 0.0).any()) throw InvalidParameter("sharing table must be nonnegative");
  if (!(values.maxCoeff() > 0.0))
    throw InvalidParameter("at least one sharing table entry must be positive");
  if (decreasing) {
    for (int z = 0; z < values.rows(); ++z)
      for (int j = 0; j + 1 < values.cols(); ++j)
        if (values(z, j + 1) > values(z, j))
          throw InvalidParameter("sharing table declared decreasing but F(z,n+1) > F(z,n) at z=" +
                                 std::to_string(z) + ", n=" + std::to_string(j + 1));
  }

  SharingFunction f;
  f.kind = SharingFunction::Kind::table;
  f.table = std::move(values);
  f.decreasing = decreasing;
  return f;
}

Real eval_sharing(const SharingFunction& f, int z, int n) {
  if (n == 0) throw OccupancyZero("payoff undefined at an empty location");
  if (n < 0) throw OutOfRange("occupancy must be nonnegative");
  if (z < 0 || z >= f.num_states()) throw OutOfRange("resource state out of range");
  if (f.kind == SharingFunction::Kind::power)
    return f.level_payoff(z) * std::pow(static_cast<Real>(n), -f.alpha);
  if (n > f.table.cols())
    throw OutOfRange("sharing table covers n = 1.." + std::to_string(f.table.cols()) +
                     ", queried n = " + std::to_string(n));
  return f.table(z, n - 1);
}

Real sup_norm(const SharingFunction& f, int L) {
  if (L < 1) throw OutOfRange("sup norm needs L >= 1");
  if (f.kind == SharingFunction::Kind::power && f.decreasing)
    return f.level_payoff.maxCoeff();  // attained at n = 1
  Real best = 0.0;
  for (int z = 0; z < f.num_states(); ++z)
    for (int n = 1; n <= L; ++n) best = std::max(best, eval_sharing(f, z, n));
  return best;
}

void ModelParams::validate() const {
  if (!(lambda > 0.0)) throw InvalidParameter("lambda must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must be in (0,1)");
  if (!(beta > 0.0)) throw InvalidParameter("beta must be > 0");
}

Strategy make_constant_strategy(int num_states, int L, Real stay) {
  if (stay < 0.0 || stay > 1.0) throw OutOfRange("stay probability must be in [0,1]");
  Strategy s;
  s.stay_prob = Matrix::Constant(num_states, L + 1, stay);
  s.stay_prob.col(0).setOnes();
  return s;
}

Real threshold_stay_prob(Real x_z, int n) {
  if (n == 0) return 1.0;
  const Real floor_x = std::floor(x_z);
  if (n < floor_x) return 1.0;
  if (n == static_cast<int>(floor_x)) return x_z - floor_x;
  return 0.0;
}

Strategy strategy_from_threshold(const ThresholdVector& x, int L) {
  const int num_states = static_cast<int>(x.x.size());
  for (int z = 0; z < num_states; ++z)
    if (!(x.x(z) >= 0.0 && x.x(z) <= static_cast<Real>(L - 1)))
      throw OutOfRange("threshold x[" + std::to_string(z) + "] outside [0, L-1]");

  Strategy s;
  s.stay_prob.resize(num_states, L + 1);
  for (int z = 0; z < num_states; ++z)
    for (int n = 0; n <= L; ++n) s.stay_prob(z, n) = threshold_stay_prob(x.x(z), n);
  return s;
}

}  // namespace nomad
