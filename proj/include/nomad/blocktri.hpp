#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nomad/errors.hpp"

namespace nomad {

// Solvers for block-tridiagonal systems with square blocks of a small fixed
// size (the number of resource states). Levels index the occupancy count, so
// systems have (levels x block) unknowns with only nearest-level coupling.

// LU-style factorization of a block-tridiagonal matrix
//   [ D_0  U_0            ]
//   [ L_1  D_1  U_1       ]
//   [      ...  ...  ...  ]
//   [           L_m  D_m  ]
// done once, then reused for many right-hand sides.
template <typename Scalar>
class BlockTridiagonalLU {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  // diag[i] is D_i (b x b); lower[i] is L_{i+1}; upper[i] is U_i.
  void factor(const std::vector<Mat>& diag, const std::vector<Mat>& lower,
              const std::vector<Mat>& upper) {
    const int m = static_cast<int>(diag.size());
    if (static_cast<int>(lower.size()) != m - 1 || static_cast<int>(upper.size()) != m - 1)
      throw DimensionMismatch("block tridiagonal bands have inconsistent sizes");
    block_ = static_cast<int>(diag[0].rows());
    pivot_inv_.resize(m);
    lower_ = lower;
    upper_.resize(m - 1);
    Mat d = diag[0];
    pivot_inv_[0] = invert(d);
    for (int i = 1; i < m; ++i) {
      upper_[i - 1] = pivot_inv_[i - 1] * upper[i - 1];
      d = diag[i] - lower[i - 1] * upper_[i - 1];
      pivot_inv_[i] = invert(d);
    }
  }

  // Solves A x = rhs in place; rhs is stacked by level.
  void solve(Vec& rhs) const {
    const int m = static_cast<int>(pivot_inv_.size());
    const int b = block_;
    const auto& lower = lower_;
    // forward elimination
    rhs.segment(0, b) = pivot_inv_[0] * rhs.segment(0, b);
    for (int i = 1; i < m; ++i) {
      rhs.segment(i * b, b) =
          pivot_inv_[i] * (rhs.segment(i * b, b) - lower[i - 1] * rhs.segment((i - 1) * b, b));
    }
    // back substitution
    for (int i = m - 2; i >= 0; --i)
      rhs.segment(i * b, b) -= upper_[i] * rhs.segment((i + 1) * b, b);
  }

  int levels() const { return static_cast<int>(pivot_inv_.size()); }
  int block() const { return block_; }

 private:
  static Mat invert(const Mat& d) {
    Eigen::PartialPivLU<Mat> lu(d);
    Mat inv = lu.inverse();
    if (!inv.allFinite()) throw SingularSystem("singular pivot block in tridiagonal factorization");
    return inv;
  }

  int block_ = 0;
  std::vector<Mat> pivot_inv_;
  std::vector<Mat> upper_;  // transformed upper band
  std::vector<Mat> lower_;
};

// Stationary distribution of a finite level-dependent quasi-birth-death
// generator, solved exactly by censoring levels from the top:
//   R_{m-1} = -U_{m-1} (C_m + R_m D_{m+1})^{-1},  pi_m = pi_{m-1} R_{m-1},
// with pi_0 the null vector of the censored level-0 generator. Level masses
// are tracked on a log scale so strongly peaked distributions neither
// overflow nor lose their shape.
//
// up[n]    : rates level n -> n+1   (n = 0..m-2)
// down[n-1]: rates level n -> n-1   (n = 1..m-1)
// local[n] : within-level rates plus the (negative) diagonal
// Returns the stationary probabilities stacked by level.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> qbd_stationary(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& up,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& down,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& local);

extern template Eigen::Matrix<double, Eigen::Dynamic, 1> qbd_stationary<double>(
    const std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>&,
    const std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>&,
    const std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>&);

}  // namespace nomad
