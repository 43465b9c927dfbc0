#pragma once

#include <cstdint>

#include "sparsex/sparsex.hpp"

namespace sparsex::testing {

inline RowMajorMatrix gaussian_entries(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  RowMajorMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  return m;
}

inline DesignMatrix gaussian_matrix(Index n, Index d, std::uint64_t seed) {
  return DesignMatrix(gaussian_entries(n, d, seed));
}

inline Vector gaussian_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

inline ResidualVector gaussian_residual(Index n, std::uint64_t seed) { return ResidualVector{gaussian_vector(n, seed)}; }

/// Column-wise dot products, an implementation independent of the row accumulation.
inline Vector transpose_product(const DesignMatrix& x, const ResidualVector& r) {
  Vector g(static_cast<Eigen::Index>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (Index i = 0; i < x.rows(); ++i) s += x(i, j) * r[i];
    g[static_cast<Eigen::Index>(j)] = s;
  }
  return g;
}

/// Replays a selector log into the estimate it describes (shared contributions only).
inline Vector replay(const DesignMatrix& x, const SelectorLog& log) {
  Vector g = Vector::Zero(static_cast<Eigen::Index>(x.cols()));
  for (const auto& c : log.contributions) g += c.weight * x.row(c.row).transpose();
  return g;
}

inline ProblemInstance make_instance(Index n, Index d, Index k, double snr, std::uint64_t seed) {
  return generate_problem({n, d, k, snr, seed});
}

}  // namespace sparsex::testing
