#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparsex/linalg.hpp"
#include "sparsex/rng.hpp"
#include "sparsex/selectors.hpp"

namespace sparsex {

enum class Algorithm { kOmp, kFrankWolfe, kCosamp };
enum class FwConstraint { kL1Ball, kSimplex };
enum class FwStep { kExactLineSearch, kHarmonic };

Algorithm parse_algorithm(std::string_view id);
std::string to_string(Algorithm algorithm);

struct SolverConfig {
  Algorithm algorithm = Algorithm::kOmp;
  std::size_t sparsity = 1;          ///< K
  std::size_t max_iterations = 0;    ///< 0: K for OMP and CoSaMP, 5000 for FW
  double fw_radius = 1.0;            ///< rho
  FwConstraint fw_constraint = FwConstraint::kL1Ball;
  FwStep fw_step = FwStep::kExactLineSearch;
  double cosamp_tolerance = 1e-3;    ///< stop when ||y - Xw|| <= tolerance
  double cosamp_relative_stop = 1.001;
  /// Residual norm of a paired exact run; enables the relative stop.
  std::optional<double> cosamp_reference_residual;

  std::size_t resolved_max_iterations() const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<Index> selected;
  double objective = 0.0;        ///< 1/2 ||Xw - y||^2 after the update
  double residual_norm = 0.0;
  std::uint64_t macs = 0;        ///< cumulative
  double wall_ms = 0.0;          ///< cumulative
};

enum class SolveStatus {
  kMaxIterations,
  kZeroGradient,
  kTolerance,
  kRelativeStop,
  kStagnation,
  kSelectorExhausted,
};

std::string to_string(SolveStatus status);

struct SolveTrace {
  std::vector<IterationRecord> iterations;
  SolveStatus status = SolveStatus::kMaxIterations;
  std::uint64_t macs = 0;
  double wall_ms = 0.0;
  std::size_t requeries = 0;        ///< OMP: selector calls that returned an already selected index
  bool regularized_solve = false;   ///< any restricted solve fell back to ridge
};

struct SolveResult {
  SparseIterate w;
  SolveTrace trace;
  double residual_norm = 0.0;

  std::size_t iterations() const noexcept { return trace.iterations.size(); }
};

using TraceSink = std::function<void(const IterationRecord&)>;

/// Gradient pursuit / OMP for least squares: K iterations, each adding the
/// selector's max-|gradient| coordinate and re-fitting on the support.
SolveResult gradient_pursuit(const DesignMatrix& x, const Vector& y, std::size_t sparsity,
                             const SelectorConfig& selector, Rng& rng, const TraceSink& sink = {});

/// Frank-Wolfe over the l1 ball of radius rho (MAX_ABS selection) or the
/// unit simplex (MIN selection).
SolveResult frank_wolfe(const DesignMatrix& x, const Vector& y, const SolverConfig& config,
                        const SelectorConfig& selector, Rng& rng, const TraceSink& sink = {});

/// CoSaMP: top-2K selection, union with the support, fit, prune to K, re-fit.
SolveResult cosamp(const DesignMatrix& x, const Vector& y, const SolverConfig& config,
                   const SelectorConfig& selector, Rng& rng, const TraceSink& sink = {});

SolveResult solve(const DesignMatrix& x, const Vector& y, const SolverConfig& config,
                  const SelectorConfig& selector, Rng& rng, const TraceSink& sink = {});

/// Vertex of the constraint set minimizing s^T g given the extreme entry g_j.
struct Atom {
  Index index = 0;
  double coefficient = 0.0;
  bool zero_gradient = false;  ///< g_j == 0 on the l1 ball; coefficient defaults to +rho
};

Atom lmo(Index j, double g_j, FwConstraint constraint, double radius);

}  // namespace sparsex
