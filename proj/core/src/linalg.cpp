#include "sparsex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparsex {

DesignMatrix::DesignMatrix(RowMajorMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw ContractError("DesignMatrix: need at least one row and one column");
  }
  if (!entries_.allFinite()) {
    throw ContractError("DesignMatrix: entries must be finite");
  }
  row_l2_ = entries_.rowwise().norm();
  row_linf_ = entries_.cwiseAbs().rowwise().maxCoeff();
}

SparseIterate::SparseIterate(Index dim, std::vector<Index> support, std::vector<double> coefficients)
    : dim_(dim) {
  if (support.size() != coefficients.size()) {
    throw ContractError("SparseIterate: support and coefficients differ in length");
  }
  std::vector<Index> order(support.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return support[a] < support[b]; });
  for (Index k : order) {
    if (support[k] >= dim) throw ContractError("SparseIterate: index out of range");
    if (!support_.empty() && support_.back() == support[k]) {
      throw ContractError("SparseIterate: duplicate support index");
    }
    if (!std::isfinite(coefficients[k])) throw ContractError("SparseIterate: non-finite coefficient");
    if (coefficients[k] == 0.0) continue;
    support_.push_back(support[k]);
    coefficients_.push_back(coefficients[k]);
  }
}

SparseIterate SparseIterate::from_dense(const Vector& dense) {
  std::vector<Index> support;
  std::vector<double> coefs;
  for (Eigen::Index j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) {
      support.push_back(static_cast<Index>(j));
      coefs.push_back(dense[j]);
    }
  }
  return SparseIterate(static_cast<Index>(dense.size()), std::move(support), std::move(coefs));
}

Vector SparseIterate::dense() const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim_));
  for (Index k = 0; k < support_.size(); ++k) out[static_cast<Eigen::Index>(support_[k])] = coefficients_[k];
  return out;
}

double SparseIterate::l1_norm() const {
  double s = 0.0;
  for (double c : coefficients_) s += std::abs(c);
  return s;
}

ResidualVector compute_residual(const DesignMatrix& x, const Vector& y, const SparseIterate& w,
                                WorkCounter& work) {
  if (w.dim() != x.cols() || static_cast<Index>(y.size()) != x.rows()) {
    throw ContractError("compute_residual: dimension mismatch");
  }
  ResidualVector r{-y};
  const auto& support = w.support();
  const auto& coefs = w.coefficients();
  const auto& m = x.entries();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (Index k = 0; k < support.size(); ++k) acc += m(i, static_cast<Eigen::Index>(support[k])) * coefs[k];
    r.values[i] += acc;
  }
  work.charge(static_cast<std::uint64_t>(x.rows()) * support.size());
  return r;
}

RestrictedSolution restricted_least_squares(const DesignMatrix& x, const Vector& y,
                                            std::span<const Index> support, WorkCounter& work) {
  if (support.empty()) throw ContractError("restricted_least_squares: empty support");
  if (static_cast<Index>(y.size()) != x.rows()) {
    throw ContractError("restricted_least_squares: dimension mismatch");
  }
  const Index n = x.rows();
  const Index m = support.size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (Index k = 0; k < m; ++k) {
    if (support[k] >= x.cols()) throw ContractError("restricted_least_squares: index out of range");
    a.col(static_cast<Eigen::Index>(k)) = x.col(support[k]);
  }
  work.charge(static_cast<std::uint64_t>(n) * m * m + static_cast<std::uint64_t>(n) * m);

  RestrictedSolution out;
  bool solved = false;
  if (m <= n) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() == static_cast<Eigen::Index>(m)) {
      out.coefficients = qr.solve(y);
      solved = true;
    }
  }
  if (!solved) {
    // Ridge 1e-10 * trace / |S| keeps degenerate supports solvable.
    Eigen::MatrixXd gram = a.transpose() * a;
    double lambda = 1e-10 * gram.trace() / static_cast<double>(m);
    if (!(lambda > 0.0)) lambda = 1e-10;
    gram.diagonal().array() += lambda;
    out.coefficients = gram.ldlt().solve(a.transpose() * y);
    out.regularized = true;
  }
  std::vector<Index> idx(support.begin(), support.end());
  std::vector<double> coefs(out.coefficients.data(), out.coefficients.data() + out.coefficients.size());
  out.iterate = SparseIterate(x.cols(), std::move(idx), std::move(coefs));
  return out;
}

Vector full_gradient(const DesignMatrix& x, const ResidualVector& r, WorkCounter& work) {
  if (r.size() != x.rows()) throw ContractError("full_gradient: dimension mismatch");
  Vector g = Vector::Zero(static_cast<Eigen::Index>(x.cols()));
  for (Index i = 0; i < x.rows(); ++i) {
    const double ri = r[i];
    if (ri != 0.0) g.noalias() += ri * x.row(i).transpose();
  }
  work.charge(static_cast<std::uint64_t>(x.rows()) * x.cols());
  return g;
}

}  // namespace sparsex
