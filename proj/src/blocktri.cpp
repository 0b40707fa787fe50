#include "nomad/blocktri.hpp"

#include <cmath>
#include <limits>

namespace nomad {

namespace {

// Left null vector of a small conservative generator, via replacing the last
// equation with a normalization pin. For a 1x1 generator the null vector is
// trivially (1).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> left_null_vector(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& g) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int b = static_cast<int>(g.rows());
  if (b == 1) return Vec::Ones(1);
  Mat a = g.transpose();
  a.row(b - 1).setOnes();
  Vec rhs = Vec::Zero(b);
  rhs(b - 1) = Scalar(1);
  Eigen::FullPivLU<Mat> lu(a);
  if (!lu.isInvertible()) throw SingularSystem("censored level-0 generator is singular");
  Vec v = lu.solve(rhs);
  v = v.cwiseMax(Scalar(0));
  const Scalar s = v.sum();
  if (!(s > Scalar(0))) throw SingularSystem("level-0 null vector has no mass");
  return v / s;
}

}  // namespace

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> qbd_stationary(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& up,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& down,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& local) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const int m = static_cast<int>(local.size());
  if (m < 1) throw DimensionMismatch("qbd needs at least one level");
  if (static_cast<int>(up.size()) != m - 1 || static_cast<int>(down.size()) != m - 1)
    throw DimensionMismatch("qbd band sizes inconsistent with level count");
  const int b = static_cast<int>(local[0].rows());

  // Backward censoring pass: R[n] maps pi_n to pi_{n+1}.
  std::vector<Mat> ratio(m > 1 ? m - 1 : 0);
  Mat censored = local[m - 1];
  for (int n = m - 2; n >= 0; --n) {
    Eigen::PartialPivLU<Mat> lu(censored);
    ratio[n] = -up[n] * lu.inverse();  // -U_n * censored^{-1}
    if (!ratio[n].allFinite())
      throw SingularSystem("singular censored generator in qbd reduction");
    censored = local[n] + ratio[n] * down[n];
  }

  // pi_0 direction, then forward products tracked on a log scale.
  Vec level = left_null_vector<Scalar>(censored);
  Vec log_mass(m);
  std::vector<Vec> shape(m);
  Scalar offset = Scalar(0);
  for (int n = 0;; ++n) {
    const Scalar peak = level.template lpNorm<Eigen::Infinity>();
    if (peak > Scalar(0)) {
      shape[n] = level / peak;
      log_mass(n) = offset + std::log(peak);
    } else {
      shape[n] = Vec::Zero(b);
      log_mass(n) = -std::numeric_limits<Scalar>::infinity();
    }
    if (n == m - 1) break;
    if (peak > Scalar(0)) {
      level = (level.transpose() * ratio[n]).transpose().cwiseMax(Scalar(0));
      level /= peak;
      offset = log_mass(n);
    } else {
      level.setZero();
    }
  }

  const Scalar top = log_mass.maxCoeff();
  Vec pi(m * b);
  for (int n = 0; n < m; ++n) {
    const Scalar w = std::isfinite(log_mass(n)) ? std::exp(log_mass(n) - top) : Scalar(0);
    pi.segment(n * b, b) = w * shape[n];
  }
  const Scalar total = pi.sum();
  if (!(total > Scalar(0)) || !pi.allFinite())
    throw SingularSystem("qbd stationary vector is degenerate");
  return pi / total;
}

template Eigen::Matrix<double, Eigen::Dynamic, 1> qbd_stationary<double>(
    const std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>&,
    const std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>&,
    const std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>&);

}  // namespace nomad
