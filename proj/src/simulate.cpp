#include "nomad/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nomad/rng.hpp"

namespace nomad {

namespace {

constexpr Real kStudentT975Df19 = 2.0930240544;  // two-sided 95%, 19 dof

Real stay_prob(const Strategy& xi, int z, int n) {
  return xi(z, std::min(n, xi.L()));
}

Real sharing_at(const SharingFunction& f, int z, int n) {
  if (f.kind == SharingFunction::Kind::table)
    n = std::min<int>(n, static_cast<int>(f.table.cols()));
  return eval_sharing(f, z, n);
}

int draw_initial_resource(const ResourceProcess& resource, Rng& rng) {
  const Real u = rng.uniform01();
  Real acc = 0.0;
  for (int z = 0; z < resource.size(); ++z) {
    acc += resource.stationary(z);
    if (u < acc) return z;
  }
  return resource.size() - 1;
}

// Accumulates a quantity over [t, t+dt) into equal-width batches, splitting
// intervals that straddle batch boundaries.
struct BatchAccumulator {
  Real width = 0.0;
  std::vector<Real> sums;

  BatchAccumulator(int batches, Real horizon)
      : width(horizon / batches), sums(static_cast<size_t>(batches), 0.0) {}

  void add(Real t, Real dt, Real value_rate) {
    Real remaining = dt;
    Real cursor = t;
    while (remaining > 0.0) {
      const auto b = static_cast<size_t>(cursor / width);
      if (b >= sums.size()) break;
      const Real boundary = (b + 1) * width;
      const Real step = std::min(remaining, boundary - cursor);
      sums[b] += value_rate * step;
      cursor += step;
      remaining -= step;
      if (step <= 0.0) break;
    }
  }

  // Mean and batch-means half-width over the batches fully covered by the
  // elapsed time.
  std::pair<Real, Real> summary(Real elapsed) const {
    const int complete = std::min<int>(static_cast<int>(elapsed / width),
                                       static_cast<int>(sums.size()));
    if (complete < 2) return {0.0, 0.0};
    Real mean = 0.0;
    for (int b = 0; b < complete; ++b) mean += sums[b] / width;
    mean /= complete;
    Real var = 0.0;
    for (int b = 0; b < complete; ++b) {
      const Real d = sums[b] / width - mean;
      var += d * d;
    }
    var /= (complete - 1);
    const Real hw = kStudentT975Df19 * std::sqrt(var / complete);
    return {mean, hw};
  }
};

}  // namespace

TrajectoryStats simulate_location(const ModelParams& params, const ResourceProcess& resource,
                                  const Strategy& strategy, Real kappa, Real horizon,
                                  std::uint64_t seed, const SimulateOptions& options) {
  params.validate();
  if (horizon < 0.0) throw InvalidParameter("horizon must be nonnegative");
  const int Z = resource.size();
  const int L = strategy.L();

  TrajectoryStats stats;
  stats.horizon = horizon;
  stats.seed = seed;
  stats.empirical_dist = Vector::Zero(static_cast<Eigen::Index>(Z) * L);
  if (horizon == 0.0) return stats;

  Rng rng(seed);
  int z = draw_initial_resource(resource, rng);
  long n = 0;

  std::vector<Real> flip_out(Z);
  for (int s = 0; s < Z; ++s) flip_out[s] = resource.out_rate(s);

  BatchAccumulator occupancy(20, horizon);
  BatchAccumulator payoff(20, horizon);
  Real occupancy_integral = 0.0;
  Real payoff_integral = 0.0;
  Real t = 0.0;

  while (t < horizon && stats.events < options.max_events) {
    const Real dep = params.lambda * n * (1.0 - params.gamma * stay_prob(strategy, z, n));
    const Real total = flip_out[z] + kappa + dep;
    const Real dt = rng.exponential(total);
    const Real step = std::min(dt, horizon - t);

    occupancy_integral += n * step;
    occupancy.add(t, step, static_cast<Real>(n));
    Real pay_rate = 0.0;
    if (options.sharing != nullptr && n >= 1)
      pay_rate = params.lambda * n * sharing_at(*options.sharing, z, static_cast<int>(n));
    payoff_integral += pay_rate * step;
    payoff.add(t, step, pay_rate);
    const int bucket = static_cast<int>(std::min<long>(n, L - 1));
    stats.empirical_dist(z * L + bucket) += step;

    t += dt;
    if (t >= horizon) {
      t = horizon;
      break;
    }
    Real u = rng.uniform01() * total;
    if (u < kappa) {
      ++n;
    } else if (u < kappa + dep) {
      --n;
    } else {
      u -= kappa + dep;
      int target = Z - 1;
      for (int y = 0; y < Z; ++y) {
        if (y == z) continue;
        u -= resource.rates(z, y);
        if (u < 0.0) {
          target = y;
          break;
        }
      }
      z = target;
    }
    ++stats.events;
  }

  const Real elapsed = std::min(t, horizon);
  if (elapsed > 0.0) {
    stats.time_avg_occupancy = occupancy_integral / elapsed;
    stats.payoff_rate = payoff_integral / elapsed;
    stats.empirical_dist /= elapsed;
    auto [om, ohw] = occupancy.summary(elapsed);
    auto [pm, phw] = payoff.summary(elapsed);
    (void)om;
    (void)pm;
    stats.occupancy_halfwidth = ohw;
    stats.payoff_halfwidth = phw;
  }
  return stats;
}

DominanceReport simulate_coupled_dominance(const ModelParams& params,
                                           const ResourceProcess& resource,
                                           const Strategy& strategy, Real kappa, Real horizon,
                                           std::uint64_t seed) {
  params.validate();
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  const int Z = resource.size();

  Rng rng(seed);
  int z = draw_initial_resource(resource, rng);
  long lower = 0, mid = 0, upper = 0;  // X1 <= N <= X2

  std::vector<Real> flip_out(Z);
  for (int s = 0; s < Z; ++s) flip_out[s] = resource.out_rate(s);

  DominanceReport rep;
  Real t = 0.0;
  Real int_lower = 0.0, int_mid = 0.0, int_upper = 0.0;

  while (t < horizon) {
    const Real total = flip_out[z] + kappa + params.lambda * upper;
    const Real dt = rng.exponential(total);
    const Real step = std::min(dt, horizon - t);
    int_lower += lower * step;
    int_mid += mid * step;
    int_upper += upper * step;
    t += dt;
    if (t >= horizon) break;

    Real u = rng.uniform01() * total;
    if (u < kappa) {
      ++lower;
      ++mid;
      ++upper;
    } else if (u < kappa + params.lambda * upper) {
      // Decision epoch of the slot-j agent; every chain holding that slot
      // resolves the epoch with the same uniform, and the departure
      // thresholds are nested: 1-gamma <= 1-gamma*xi <= 1.
      const long j = rng.below(upper);
      const Real u2 = rng.uniform01();
      if (j < lower) --lower;
      if (j < mid && u2 < 1.0 - params.gamma * stay_prob(strategy, z, static_cast<int>(mid)))
        --mid;
      if (u2 < 1.0 - params.gamma) --upper;
    } else {
      u -= kappa + params.lambda * upper;
      int target = Z - 1;
      for (int y = 0; y < Z; ++y) {
        if (y == z) continue;
        u -= resource.rates(z, y);
        if (u < 0.0) {
          target = y;
          break;
        }
      }
      z = target;
    }
    ++rep.events;
    if (!(lower <= mid && mid <= upper)) {
      ++rep.violations;
      rep.sandwich_held = false;
    }
    rep.lower_always_equal = rep.lower_always_equal && (lower == mid);
    rep.upper_always_equal = rep.upper_always_equal && (mid == upper);
  }

  rep.time_avg_lower = int_lower / horizon;
  rep.time_avg_mid = int_mid / horizon;
  rep.time_avg_upper = int_upper / horizon;
  return rep;
}

PairDominanceReport simulate_coupled_pair(const ModelParams& params,
                                          const ResourceProcess& resource,
                                          const Strategy& xi_lower, Real kappa_lower,
                                          const Strategy& xi_upper, Real kappa_upper,
                                          Real horizon, std::uint64_t seed) {
  params.validate();
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  if (kappa_lower > kappa_upper)
    throw InvalidParameter("pair coupling requires kappa_lower <= kappa_upper");
  const int Z = resource.size();
  const Real gamma = params.gamma;

  Rng rng(seed);
  int z = draw_initial_resource(resource, rng);
  long n_lo = 0, n_up = 0;

  std::vector<Real> flip_out(Z);
  for (int s = 0; s < Z; ++s) flip_out[s] = resource.out_rate(s);

  PairDominanceReport rep;
  Real t = 0.0;
  Real int_lo = 0.0, int_up = 0.0;

  while (t < horizon) {
    const Real xi_up = stay_prob(xi_upper, z, static_cast<int>(n_up));
    const Real dep_up = params.lambda * n_up * (1.0 - gamma * xi_up);
    const Real loop_up = params.lambda * n_up * gamma * xi_up;
    const Real total = flip_out[z] + kappa_upper + dep_up + loop_up;
    const Real dt = rng.exponential(total);
    const Real step = std::min(dt, horizon - t);
    int_lo += n_lo * step;
    int_up += n_up * step;
    t += dt;
    if (t >= horizon) break;

    const Real xi_lo = stay_prob(xi_lower, z, static_cast<int>(n_lo));
    const Real dep_lo = params.lambda * n_lo * (1.0 - gamma * xi_lo);

    Real u = rng.uniform01() * total;
    if (u < kappa_upper) {
      ++n_up;
      if (rng.bernoulli(kappa_lower / kappa_upper)) ++n_lo;
    } else if (u < kappa_upper + dep_up) {
      // Upper departure: the lower chain departs with probability
      // min(zeta, 1), zeta the ratio of departure rates.
      const Real zeta = dep_lo / dep_up;
      --n_up;
      if (rng.bernoulli(std::min(zeta, 1.0))) --n_lo;
    } else if (u < kappa_upper + dep_up + loop_up) {
      // Upper epoch where the agent stays: the lower chain departs with the
      // excess probability eta when its departure rate exceeds the upper's.
      const Real zeta = dep_lo / dep_up;
      if (zeta > 1.0) {
        const Real eta = ((1.0 - gamma * xi_up) / (gamma * xi_up)) * (zeta - 1.0);
        if (rng.bernoulli(std::min(eta, 1.0))) --n_lo;
      }
    } else {
      u -= kappa_upper + dep_up + loop_up;
      int target = Z - 1;
      for (int y = 0; y < Z; ++y) {
        if (y == z) continue;
        u -= resource.rates(z, y);
        if (u < 0.0) {
          target = y;
          break;
        }
      }
      z = target;
    }
    ++rep.events;
    if (n_lo > n_up) {
      ++rep.violations;
      rep.dominated = false;
    }
  }

  rep.time_avg_lower = int_lo / horizon;
  rep.time_avg_upper = int_up / horizon;
  return rep;
}

FiniteSystemStats simulate_finite_system(int K, const ModelParams& params,
                                         const ResourceProcess& resource,
                                         const Strategy& strategy,
                                         const SharingFunction& sharing, Real horizon,
                                         std::uint64_t seed) {
  params.validate();
  if (K < 2) throw InvalidSystem("finite system needs at least two locations");
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");

  const int Z = resource.size();
  const int N = static_cast<int>(std::llround(params.beta * K));
  Rng rng(seed);

  std::vector<int> loc_state(K);
  std::vector<int> occupancy(K, 0);
  for (int k = 0; k < K; ++k) loc_state[k] = draw_initial_resource(resource, rng);

  struct Agent {
    int loc = 0;
    std::vector<Real> open_samples;  // payoff accrued since each switch
  };
  std::vector<Agent> agents(N);
  for (auto& a : agents) {
    a.loc = static_cast<int>(rng.below(K));
    ++occupancy[a.loc];
  }

  std::vector<Real> flip_out(Z);
  for (int s = 0; s < Z; ++s) flip_out[s] = resource.out_rate(s);
  Real total_flip = 0.0;
  for (int k = 0; k < K; ++k) total_flip += flip_out[loc_state[k]];

  // Samples opened close to the horizon would often still be accruing at the
  // end; they are not opened at all, and any still open at the end are
  // dropped rather than truncated.
  const Real expected_life = 1.0 / (params.lambda * (1.0 - params.gamma));
  const Real t_cut = std::max(0.0, horizon - 20.0 * expected_life);

  std::vector<Real> closed_samples;
  std::vector<std::vector<Real>> joint(Z);  // time spent with n agents, per z

  auto record_joint = [&](Real dt) {
    for (int k = 0; k < K; ++k) {
      auto& row = joint[loc_state[k]];
      const auto n = static_cast<size_t>(occupancy[k]);
      if (row.size() <= n) row.resize(n + 1, 0.0);
      row[n] += dt;
    }
  };

  FiniteSystemStats stats;
  stats.locations = K;
  stats.agents = N;
  stats.horizon = horizon;
  stats.seed = seed;

  Real t = 0.0;
  Real occupancy_integral = 0.0;
  while (t < horizon) {
    const Real total = N * params.lambda + total_flip;
    const Real dt = rng.exponential(total);
    const Real step = std::min(dt, horizon - t);
    record_joint(step);
    occupancy_integral += step * (static_cast<Real>(N) / K);
    t += dt;
    if (t >= horizon) break;
    ++stats.events;

    Real u = rng.uniform01() * total;
    if (u < N * params.lambda) {
      // Decision epoch: payoff, stay/switch, then the survival draw.
      const int i = static_cast<int>(rng.below(N));
      Agent& agent = agents[i];
      const int z = loc_state[agent.loc];
      const int n = occupancy[agent.loc];
      const Real payoff = sharing_at(sharing, z, n);
      for (Real& s : agent.open_samples) s += payoff;

      const bool stays = rng.bernoulli(stay_prob(strategy, z, n));
      if (!stays) {
        int dest = static_cast<int>(rng.below(K - 1));
        if (dest >= agent.loc) ++dest;  // uniform over the other locations
        --occupancy[agent.loc];
        ++occupancy[dest];
        agent.loc = dest;
      }
      if (rng.bernoulli(1.0 - params.gamma)) {
        // Lifetime expires: close samples and replace the agent at a
        // uniformly chosen location.
        for (Real s : agent.open_samples) closed_samples.push_back(s);
        agent.open_samples.clear();
        --occupancy[agent.loc];
        agent.loc = static_cast<int>(rng.below(K));
        ++occupancy[agent.loc];
      } else if (!stays && t < t_cut) {
        agent.open_samples.push_back(0.0);
      }
    } else {
      u -= N * params.lambda;
      int k = K - 1;
      for (int c = 0; c < K; ++c) {
        u -= flip_out[loc_state[c]];
        if (u < 0.0) {
          k = c;
          break;
        }
      }
      Real u2 = rng.uniform01() * flip_out[loc_state[k]];
      const int z = loc_state[k];
      int target = Z - 1;
      for (int y = 0; y < Z; ++y) {
        if (y == z) continue;
        u2 -= resource.rates(z, y);
        if (u2 < 0.0) {
          target = y;
          break;
        }
      }
      total_flip += flip_out[target] - flip_out[z];
      loc_state[k] = target;
    }
  }

  stats.occupancy_mean = occupancy_integral / horizon;
  int n_cap = 0;
  for (const auto& row : joint) n_cap = std::max<int>(n_cap, static_cast<int>(row.size()));
  stats.empirical = Matrix::Zero(Z, std::max(n_cap, 1));
  for (int z = 0; z < Z; ++z)
    for (size_t n = 0; n < joint[z].size(); ++n) stats.empirical(z, n) = joint[z][n];
  stats.empirical /= horizon * K;

  stats.switch_samples = static_cast<long>(closed_samples.size());
  if (!closed_samples.empty()) {
    Real mean = 0.0;
    for (Real s : closed_samples) mean += s;
    mean /= static_cast<Real>(closed_samples.size());
    stats.post_switch_payoff_mean = mean;
    // Batch means over the samples in closure order.
    const int batches = 20;
    if (closed_samples.size() >= 2 * batches) {
      const size_t per = closed_samples.size() / batches;
      Real var = 0.0;
      for (int b = 0; b < batches; ++b) {
        Real bm = 0.0;
        for (size_t j = b * per; j < (b + 1) * per; ++j) bm += closed_samples[j];
        bm /= static_cast<Real>(per);
        var += (bm - mean) * (bm - mean);
      }
      var /= (batches - 1);
      stats.post_switch_payoff_halfwidth = kStudentT975Df19 * std::sqrt(var / batches);
    }
  }
  return stats;
}

}  // namespace nomad
