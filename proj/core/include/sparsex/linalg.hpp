#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sparsex {

using Index = std::size_t;
using Vector = Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Thrown when an operation's preconditions (dimensions, ranges) are violated.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-run cost accounting. One unit is one scalar multiply-accumulate on
/// matrix data (plus the documented O(d) stability overhead). Only grows.
class WorkCounter {
 public:
  void charge(std::uint64_t units) noexcept { macs_ += units; }
  std::uint64_t macs() const noexcept { return macs_; }

 private:
  std::uint64_t macs_ = 0;
};

/// Dense n x d design matrix stored row-contiguous, with cached row norms.
/// Immutable after construction; safe to share across threads.
class DesignMatrix {
 public:
  explicit DesignMatrix(RowMajorMatrix entries);

  Index rows() const noexcept { return static_cast<Index>(entries_.rows()); }
  Index cols() const noexcept { return static_cast<Index>(entries_.cols()); }

  const RowMajorMatrix& entries() const noexcept { return entries_; }
  double operator()(Index i, Index j) const { return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

  auto row(Index i) const { return entries_.row(static_cast<Eigen::Index>(i)); }
  auto col(Index j) const { return entries_.col(static_cast<Eigen::Index>(j)); }

  const Vector& row_l2_norms() const noexcept { return row_l2_; }
  const Vector& row_linf_norms() const noexcept { return row_linf_; }

 private:
  RowMajorMatrix entries_;
  Vector row_l2_;
  Vector row_linf_;
};

/// Residual r with the gradient convention: for least squares
/// L(w) = 1/2 ||y - Xw||^2 the stored values are r = Xw - y, so that the
/// gradient is exactly X^T r.
struct ResidualVector {
  Vector values;

  Index size() const noexcept { return static_cast<Index>(values.size()); }
  double operator[](Index i) const { return values[static_cast<Eigen::Index>(i)]; }
  bool is_zero() const { return values.size() == 0 || (values.array() == 0.0).all(); }
};

/// Sparse coefficient vector: strictly increasing support with aligned
/// nonzero coefficients. Explicit zeros are pruned on construction.
class SparseIterate {
 public:
  SparseIterate() = default;
  explicit SparseIterate(Index dim) : dim_(dim) {}
  SparseIterate(Index dim, std::vector<Index> support, std::vector<double> coefficients);

  static SparseIterate from_dense(const Vector& dense);

  Index dim() const noexcept { return dim_; }
  Index nnz() const noexcept { return support_.size(); }
  bool empty() const noexcept { return support_.empty(); }
  const std::vector<Index>& support() const noexcept { return support_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }

  Vector dense() const;
  double l1_norm() const;

 private:
  Index dim_ = 0;
  std::vector<Index> support_;
  std::vector<double> coefficients_;
};

/// r = X_S w_S - y using only the support columns; charges n * |S|.
ResidualVector compute_residual(const DesignMatrix& x, const Vector& y, const SparseIterate& w,
                                WorkCounter& work);

/// Least-squares fit restricted to `support` (coordinates off the support are zero).
struct RestrictedSolution {
  SparseIterate iterate;
  /// Dense coefficients aligned with the requested support (zeros kept).
  Vector coefficients;
  /// True when the column-pivoted QR detected rank deficiency (or |S| > n)
  /// and the ridge-regularized normal equations were used instead.
  bool regularized = false;
};

/// Minimizes 1/2 ||y - X_S w_S||^2. `support` need not be sorted but must be
/// duplicate-free and nonempty. Charges n * |S|^2 + n * |S|.
RestrictedSolution restricted_least_squares(const DesignMatrix& x, const Vector& y,
                                            std::span<const Index> support, WorkCounter& work);

/// X^T r accumulated row by row; charges n * d.
Vector full_gradient(const DesignMatrix& x, const ResidualVector& r, WorkCounter& work);

/// 1/2 ||r||^2.
inline double objective(const ResidualVector& r) { return 0.5 * r.values.squaredNorm(); }

}  // namespace sparsex
