#include "sparsex/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace sparsex {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

class RunState {
 public:
  explicit RunState(const TraceSink& sink) : sink_(sink), start_(Clock::now()) {}

  WorkCounter work;
  SolveTrace trace;

  void record(std::vector<Index> selected, const ResidualVector& r) {
    IterationRecord rec;
    rec.iteration = trace.iterations.size();
    rec.selected = std::move(selected);
    rec.objective = objective(r);
    rec.residual_norm = r.values.norm();
    rec.macs = work.macs();
    rec.wall_ms = elapsed_ms(start_);
    if (sink_) sink_(rec);
    trace.iterations.push_back(std::move(rec));
  }

  SolveResult finish(SparseIterate w, const ResidualVector& r) {
    trace.macs = work.macs();
    trace.wall_ms = elapsed_ms(start_);
    return SolveResult{std::move(w), std::move(trace), r.values.norm()};
  }

 private:
  const TraceSink& sink_;
  Clock::time_point start_;
};

void check_problem(const DesignMatrix& x, const Vector& y) {
  if (static_cast<Index>(y.size()) != x.rows()) throw ContractError("solver: y length differs from n");
  if (!y.allFinite()) throw ContractError("solver: y must be finite");
}

}  // namespace

Algorithm parse_algorithm(std::string_view id) {
  if (id == "omp") return Algorithm::kOmp;
  if (id == "fw") return Algorithm::kFrankWolfe;
  if (id == "cosamp") return Algorithm::kCosamp;
  throw ContractError("unknown solver '" + std::string(id) + "'");
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kOmp: return "omp";
    case Algorithm::kFrankWolfe: return "fw";
    case Algorithm::kCosamp: return "cosamp";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kMaxIterations: return "max-iterations";
    case SolveStatus::kZeroGradient: return "zero-gradient";
    case SolveStatus::kTolerance: return "tolerance";
    case SolveStatus::kRelativeStop: return "relative-stop";
    case SolveStatus::kStagnation: return "stagnation";
    case SolveStatus::kSelectorExhausted: return "selector-exhausted";
  }
  return "?";
}

std::size_t SolverConfig::resolved_max_iterations() const {
  if (max_iterations > 0) return max_iterations;
  return algorithm == Algorithm::kFrankWolfe ? 5000 : sparsity;
}

Atom lmo(Index j, double g_j, FwConstraint constraint, double radius) {
  if (constraint == FwConstraint::kSimplex) return {j, 1.0, false};
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ContractError("lmo: radius must be positive");
  if (g_j == 0.0) return {j, radius, true};
  return {j, g_j > 0.0 ? -radius : radius, false};
}

SolveResult gradient_pursuit(const DesignMatrix& x, const Vector& y, std::size_t sparsity,
                             const SelectorConfig& selector, Rng& rng, const TraceSink& sink) {
  check_problem(x, y);
  const Index d = x.cols();
  if (sparsity < 1 || sparsity > std::min(x.rows(), d)) throw ContractError("gradient_pursuit: need 1 <= K <= min(n, d)");

  RunState run(sink);
  std::vector<Index> support;
  std::vector<std::uint8_t> in_support(d, 0);
  SparseIterate w(d);
  ResidualVector r = compute_residual(x, y, w, run.work);

  for (std::size_t it = 0; it < sparsity; ++it) {
    std::vector<std::uint8_t> masked;
    Index chosen = d;
    bool zero = false;
    for (std::size_t attempt = 0; attempt <= d; ++attempt) {
      SelectOptions opts;
      opts.excluded = masked;
      const auto outcome = select(selector, x, r, SelectorMode::max_abs(), rng, opts);
      run.work.charge(outcome.macs);
      if (outcome.meta.zero_gradient) {
        zero = true;
        break;
      }
      const Index j = outcome.indices.front();
      if (!in_support[j]) {
        chosen = j;
        break;
      }
      ++run.trace.requeries;
      if (masked.empty()) masked.assign(d, 0);
      masked[j] = 1;
      if (static_cast<std::size_t>(std::count(masked.begin(), masked.end(), 1)) == d) break;
    }
    if (zero) {
      run.trace.status = SolveStatus::kZeroGradient;
      break;
    }
    if (chosen == d) {
      run.trace.status = SolveStatus::kSelectorExhausted;
      break;
    }
    support.push_back(chosen);
    in_support[chosen] = 1;
    auto sol = restricted_least_squares(x, y, support, run.work);
    run.trace.regularized_solve |= sol.regularized;
    w = std::move(sol.iterate);
    r = compute_residual(x, y, w, run.work);
    run.record({chosen}, r);
  }
  return run.finish(std::move(w), r);
}

SolveResult frank_wolfe(const DesignMatrix& x, const Vector& y, const SolverConfig& config,
                        const SelectorConfig& selector, Rng& rng, const TraceSink& sink) {
  check_problem(x, y);
  const Index n = x.rows();
  const Index d = x.cols();
  const SelectorMode mode =
      config.fw_constraint == FwConstraint::kL1Ball ? SelectorMode::max_abs() : SelectorMode::min();

  RunState run(sink);
  Vector w = Vector::Zero(static_cast<Eigen::Index>(d));
  Vector xw = Vector::Zero(static_cast<Eigen::Index>(n));
  ResidualVector r{-y};
  Vector xs(static_cast<Eigen::Index>(n));

  const std::size_t iterations = config.resolved_max_iterations();
  for (std::size_t k = 0; k < iterations; ++k) {
    const auto outcome = select(selector, x, r, mode, rng);
    run.work.charge(outcome.macs);
    if (outcome.meta.zero_gradient) {
      run.trace.status = SolveStatus::kZeroGradient;
      break;
    }
    const Atom atom = lmo(outcome.indices.front(), outcome.values.front(), config.fw_constraint, config.fw_radius);
    xs = atom.coefficient * x.col(atom.index);
    run.work.charge(n);

    double gamma;
    if (config.fw_step == FwStep::kExactLineSearch) {
      // argmin_g 1/2 ||r + g q||^2 over [0, 1], q = X s - X w.
      const Vector q = xs - xw;
      const double den = q.squaredNorm();
      gamma = den > 0.0 ? std::clamp(-r.values.dot(q) / den, 0.0, 1.0) : 0.0;
      run.work.charge(2 * n);
    } else {
      gamma = 2.0 / (static_cast<double>(k) + 2.0);
    }

    w *= (1.0 - gamma);
    w[static_cast<Eigen::Index>(atom.index)] += gamma * atom.coefficient;
    xw = (1.0 - gamma) * xw + gamma * xs;
    r.values = xw - y;
    run.work.charge(n);
    run.record({atom.index}, r);
  }
  return run.finish(SparseIterate::from_dense(w), r);
}

SolveResult cosamp(const DesignMatrix& x, const Vector& y, const SolverConfig& config,
                   const SelectorConfig& selector, Rng& rng, const TraceSink& sink) {
  check_problem(x, y);
  const Index d = x.cols();
  const std::size_t k = config.sparsity;
  if (k < 1 || k > d) throw ContractError("cosamp: need 1 <= K <= d");
  const std::size_t m = std::min<std::size_t>(2 * k, d);

  RunState run(sink);
  SparseIterate w(d);
  std::vector<Index> support;
  ResidualVector r = compute_residual(x, y, w, run.work);
  double previous = r.values.norm();
  std::size_t non_decreasing = 0;

  const std::size_t iterations = config.resolved_max_iterations();
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto outcome = select(selector, x, r, SelectorMode::top_m_abs(m), rng);
    run.work.charge(outcome.macs);
    if (outcome.meta.zero_gradient) {
      run.trace.status = SolveStatus::kZeroGradient;
      break;
    }

    std::vector<Index> merged = outcome.indices;
    merged.insert(merged.end(), support.begin(), support.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    const auto wide = restricted_least_squares(x, y, merged, run.work);
    run.trace.regularized_solve |= wide.regularized;

    std::vector<std::size_t> order(merged.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& b = wide.coefficients;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
      return std::abs(b[static_cast<Eigen::Index>(p)]) > std::abs(b[static_cast<Eigen::Index>(q)]);
    });
    order.resize(std::min(order.size(), k));
    support.clear();
    for (std::size_t p : order) support.push_back(merged[p]);
    std::sort(support.begin(), support.end());

    const auto pruned = restricted_least_squares(x, y, support, run.work);
    run.trace.regularized_solve |= pruned.regularized;
    w = pruned.iterate;
    r = compute_residual(x, y, w, run.work);
    run.record(outcome.indices, r);

    const double norm = r.values.norm();
    if (norm <= config.cosamp_tolerance) {
      run.trace.status = SolveStatus::kTolerance;
      break;
    }
    if (config.cosamp_reference_residual &&
        norm <= config.cosamp_relative_stop * *config.cosamp_reference_residual) {
      run.trace.status = SolveStatus::kRelativeStop;
      break;
    }
    non_decreasing = norm >= previous ? non_decreasing + 1 : 0;
    if (non_decreasing >= 3) {
      run.trace.status = SolveStatus::kStagnation;
      break;
    }
    previous = norm;
  }
  return run.finish(std::move(w), r);
}

SolveResult solve(const DesignMatrix& x, const Vector& y, const SolverConfig& config,
                  const SelectorConfig& selector, Rng& rng, const TraceSink& sink) {
  switch (config.algorithm) {
    case Algorithm::kOmp: {
      const std::size_t k = config.sparsity;
      return gradient_pursuit(x, y, k, selector, rng, sink);
    }
    case Algorithm::kFrankWolfe:
      return frank_wolfe(x, y, config, selector, rng, sink);
    case Algorithm::kCosamp:
      return cosamp(x, y, config, selector, rng, sink);
  }
  throw ContractError("solve: unknown algorithm");
}

}  // namespace sparsex
