#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sparsex/linalg.hpp"

namespace sparsex {

struct ProblemParams {
  Index n = 0;
  Index d = 0;
  Index k = 0;
  double snr_db = 3.0;
  std::uint64_t seed = 0;
};

/// y = X w* + e with unit-norm columns, k-sparse w* and noise set by the SNR.
struct ProblemInstance {
  DesignMatrix x;
  Vector y;
  SparseIterate w_star;
  ProblemParams params;
  double sigma_e = 0.0;

  /// FNV-1a over the bytes of X and y, as 16 hex digits. Used to verify
  /// that paired benchmark cells saw the same data.
  std::string hash() const;
};

/// Generation protocol:
///  - support: k positions uniform without replacement;
///  - values: g + 0.1 sign(g), g ~ N(0, 1), sign(0) = +1;
///  - columns of X: normalized standard normal n-vectors (uniform on the sphere);
///  - sigma_e^2 = ||X w*||^2 / n * 10^(-snr/10), e ~ N(0, sigma_e^2 I).
/// Draw order is fixed (support, values, X column by column, noise), so a
/// seed reproduces the instance bit for bit.
ProblemInstance generate_problem(const ProblemParams& params);

/// Support of w above threshold gamma: { j : |w_j| > gamma }.
std::vector<Index> thresholded_support(const SparseIterate& w, double gamma);

/// 2 |S* n S^| / (|S*| + |S^|) on gamma-thresholded supports; 1 when both are empty.
double f_measure(const SparseIterate& w_star, const SparseIterate& w_hat, double gamma = 1e-3);

/// Writes <prefix>.X.sxgm, <prefix>.y.sxgm and <prefix>.meta (key = value lines).
void export_instance(const ProblemInstance& instance, const std::filesystem::path& prefix);

}  // namespace sparsex
