#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nomad/errors.hpp"

namespace nomad {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Exogenous finite-state resource chain of a location: labels, transition
// rates (diagonal ignored) and the stationary law of the chain.
struct ResourceProcess {
  std::vector<std::string> states;
  Matrix rates;       // off-diagonal entries are the transition rates
  Vector stationary;  // unique invariant distribution

  int size() const { return static_cast<int>(rates.rows()); }

  // Total rate of leaving state z.
  Real out_rate(int z) const {
    Real sum = 0.0;
    for (int y = 0; y < size(); ++y)
      if (y != z) sum += rates(z, y);
    return sum;
  }
};

ResourceProcess make_resource_process(std::vector<std::string> states, Matrix rates);

// Convenience for the common symmetric binary setting.
ResourceProcess make_binary_resource(Real mu01, Real mu10);

// Per-epoch payoff F(z, n) for an agent at a location with resource level z
// shared among n agents. Either the power family g(z) * n^-alpha or an
// explicit table over n = 1..L.
struct SharingFunction {
  enum class Kind { power, table };

  Kind kind = Kind::power;
  Vector level_payoff;  // power: g(z)
  Real alpha = 1.0;
  Matrix table;  // table: column j holds F(., j+1)
  bool decreasing = true;

  int num_states() const {
    return kind == Kind::power ? static_cast<int>(level_payoff.size())
                               : static_cast<int>(table.rows());
  }
};

SharingFunction make_power_sharing(Vector level_payoff, Real alpha);
SharingFunction make_table_sharing(Matrix values, bool decreasing);

Real eval_sharing(const SharingFunction& f, int z, int n);

// max over z and n = 1..L of F(z, n)
Real sup_norm(const SharingFunction& f, int L);

struct ModelParams {
  Real lambda = 1.0;  // decision-epoch rate
  Real gamma = 0.95;  // per-epoch survival probability
  Real beta = 20.0;   // agent density

  void validate() const;
};

// Stay probability xi(z, n) for n = 0..L; xi(z, 0) = 1 by convention.
struct Strategy {
  Matrix stay_prob;  // num_states x (L + 1)

  int num_states() const { return static_cast<int>(stay_prob.rows()); }
  int L() const { return static_cast<int>(stay_prob.cols()) - 1; }
  Real operator()(int z, int n) const { return stay_prob(z, n); }
};

Strategy make_constant_strategy(int num_states, int L, Real stay);

struct ThresholdVector {
  Vector x;  // one threshold per resource state, each in [0, L-1]
};

// xi^x(z, n): stay below floor(x_z), mix with the fractional part at
// floor(x_z), leave above; n = 0 always stays.
Real threshold_stay_prob(Real x_z, int n);

Strategy strategy_from_threshold(const ThresholdVector& x, int L);

}  // namespace nomad
