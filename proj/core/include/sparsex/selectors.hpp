#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsex/linalg.hpp"
#include "sparsex/rng.hpp"
#include "sparsex/stopping.hpp"

namespace sparsex {

/// Which extreme entry of X^T r a solver asks for.
struct SelectorMode {
  enum class Kind { kMin, kMaxAbs, kTopMAbs };

  Kind kind = Kind::kMaxAbs;
  std::size_t m = 1;

  static SelectorMode min() { return {Kind::kMin, 1}; }
  static SelectorMode max_abs() { return {Kind::kMaxAbs, 1}; }
  static SelectorMode top_m_abs(std::size_t m);

  bool operator==(const SelectorMode&) const = default;
};

std::string to_string(SelectorMode::Kind kind);

/// Extreme coordinates of `g` for `mode`, skipping coordinates flagged in
/// `excluded` (empty span: nothing excluded). Ties go to the smallest index.
/// TOP_M_ABS results are ordered by decreasing |g|.
std::vector<Index> extreme_indices(const Vector& g, const SelectorMode& mode,
                                   std::span<const std::uint8_t> excluded = {});

/// Partial accumulation of X^T r: the sum of weighted rows actually applied.
struct GradientEstimate {
  explicit GradientEstimate(Index d) : vector(Vector::Zero(static_cast<Eigen::Index>(d))) {}

  Vector vector;
  std::vector<Index> used_indices;  ///< distinct rows applied, in first-use order
  std::size_t t = 0;                ///< number of applied contributions
  std::uint64_t macs = 0;

  /// vector += weight * x_row; charges d.
  void add(const DesignMatrix& x, Index row, double weight);

 private:
  std::vector<std::uint8_t> seen_;
};

enum class SamplingKind { kUniform, kImportance };

/// A point in the interior of the probability simplex over rows.
class SamplingDistribution {
 public:
  /// UNIFORM: p_i = 1/n. IMPORTANCE: p_i proportional to |r_i| ||x_i||_2 with
  /// zero weights floored at 1e-15 before normalization. An all-zero
  /// importance weight vector falls back to UNIFORM and sets zero_gradient().
  static SamplingDistribution build(const ResidualVector& r, const Vector& row_l2_norms,
                                    SamplingKind kind);
  static SamplingDistribution from_probabilities(Vector p);

  const Vector& probabilities() const noexcept { return p_; }
  double operator[](Index i) const { return p_[static_cast<Eigen::Index>(i)]; }
  Index size() const noexcept { return static_cast<Index>(p_.size()); }
  bool zero_gradient() const noexcept { return zero_gradient_; }

  /// Inverse-CDF draw.
  Index sample(Rng& rng) const;

 private:
  explicit SamplingDistribution(Vector p);

  Vector p_;
  std::vector<double> cdf_;
  bool zero_gradient_ = false;
};

struct ArmState {
  Index arm = 0;
  double score = 0.0;
  std::size_t pulls = 0;
};

enum class StopReason {
  kExhausted,        ///< all n rows accumulated (or exact computation)
  kStability,
  kErrorBound,
  kDrawCap,
  kBudgetSpent,      ///< bandit schedule completed
  kZeroGradient,
  kAgreement,        ///< doubling trick: two budgets agreed
  kNoAgreement,
};

std::string to_string(StopReason reason);

/// One applied contribution. `arm` is npos when the draw was shared by all
/// surviving arms (greedy, randomized, non-iid and non-stochastic halving).
struct Contribution {
  static constexpr Index kShared = static_cast<Index>(-1);
  Index row = 0;
  double weight = 0.0;
  std::size_t round = 0;
  Index arm = kShared;
};

struct SelectorLog {
  std::vector<Contribution> contributions;
  /// Arm states after each bandit round, before elimination.
  std::vector<std::vector<ArmState>> rounds;
};

struct SelectorMeta {
  std::size_t steps = 0;            ///< accumulation count t (or per-arm pulls for bandits)
  std::size_t distinct_rows = 0;    ///< |I_t|
  std::uint64_t pulls = 0;          ///< scheduled (arm, pull) pairs
  std::uint64_t budget = 0;
  std::uint64_t overshoot = 0;      ///< pulls added by the one-pull floor guard
  std::size_t runs = 1;             ///< doubling trick
  StopReason stop_reason = StopReason::kExhausted;
  bool zero_gradient = false;
  bool no_agreement = false;
};

struct SelectorOutcome {
  std::vector<Index> indices;
  /// Estimated (possibly scaled) gradient entries at `indices`; the sign is
  /// what the Frank-Wolfe linear minimization needs.
  std::vector<double> values;
  SelectorMode mode;
  std::uint64_t macs = 0;
  SelectorMeta meta;
  SelectorLog log;  ///< populated only when SelectOptions::record_log is set
};

struct SelectOptions {
  /// Nonzero entries mark coordinates that must not be returned.
  std::span<const std::uint8_t> excluded;
  bool record_log = false;
};

/// Full X^T r, then the extreme entry. macs = n d.
SelectorOutcome exact_selector(const DesignMatrix& x, const ResidualVector& r, const SelectorMode& mode,
                               const SelectOptions& opts = {});

/// Accumulates rows in decreasing |r_i| ||x_i||_2 order until `stop` fires.
/// macs = t d + ceil(n log2 n) + (stability ? t d : 0).
SelectorOutcome greedy_deterministic_selector(const DesignMatrix& x, const ResidualVector& r,
                                              const SelectorMode& mode, const StoppingRule& stop,
                                              const SelectOptions& opts = {});

/// Draws rows i.i.d. from `dist`, accumulating x_i r_i / p_i (not divided by
/// t), until `stop` fires or `max_draws` draws (0 means n). ERROR_BOUND is
/// not supported here. macs = t d + (stability ? t d : 0).
SelectorOutcome randomized_selector(const DesignMatrix& x, const ResidualVector& r, const SelectorMode& mode,
                                    const SamplingDistribution& dist, const StoppingRule& stop, Rng& rng,
                                    const SelectOptions& opts = {}, std::size_t max_draws = 0);

enum class BanditLoss { kNonIidStochastic, kNonStochastic };
enum class PermutationKind { kWeightOrder, kRandom };

struct HalvingConfig {
  std::uint64_t budget = 0;
  BanditLoss loss = BanditLoss::kNonStochastic;
  /// Row order for NON_STOCHASTIC pulls.
  PermutationKind permutation = PermutationKind::kWeightOrder;
  /// Overrides the ceil(log2 d) divisor in the per-round pull allocation.
  std::optional<std::size_t> log_divisor;
};

/// Successive halving over the d coordinates. Each pull advances every
/// surviving arm by the same row: NON_IID draws it uniformly (weight n r_i),
/// NON_STOCHASTIC walks a fixed permutation (weight r_i) and freezes after n
/// pulls. macs = one per (survivor, effective pull), plus ceil(n log2 n) for
/// the NON_STOCHASTIC sort. TOP_M_ABS mode dispatches to the top-m variant.
SelectorOutcome successive_halving_selector(const DesignMatrix& x, const ResidualVector& r,
                                            const SelectorMode& mode, const HalvingConfig& config, Rng& rng,
                                            const SelectOptions& opts = {});

/// Same schedule, halving stops before the survivor set would drop below m;
/// returns the m best survivors by |score|.
SelectorOutcome successive_halving_top_m(const DesignMatrix& x, const ResidualVector& r, std::size_t m,
                                         const HalvingConfig& config, Rng& rng, const SelectOptions& opts = {});

/// Cumulative per-arm pull counts n_1..n_{d-1} of successive reject:
/// n_l = ceil((T - d) / (logbar(d) (d + 1 - l))), logbar(d) = 1/2 + sum_{i=2}^d 1/i.
std::vector<std::uint64_t> successive_reject_schedule(std::size_t arms, std::uint64_t budget);

/// Successive reject with i.i.d. uniform per-arm draws (weight n r_i x_ij).
/// One arm rejected per phase. macs = one per (arm, pull).
SelectorOutcome successive_reject_selector(const DesignMatrix& x, const ResidualVector& r,
                                           const SelectorMode& mode, std::uint64_t budget, Rng& rng,
                                           const SelectOptions& opts = {});

/// Single mini-batch of b rows drawn uniformly without replacement. macs = b d.
SelectorOutcome stochastic_minibatch_selector(const DesignMatrix& x, const ResidualVector& r,
                                              const SelectorMode& mode, std::size_t batch_size, Rng& rng,
                                              const SelectOptions& opts = {});

/// A selector addressed by its CLI identifier:
/// exact, greedy, uniform, importance, halving-noniid, halving-nonstoch,
/// reject, stoch:<b>.
struct SelectorConfig {
  enum class Kind { kExact, kGreedy, kUniform, kImportance, kHalvingNonIid, kHalvingNonStoch, kReject, kMiniBatch };

  Kind kind = Kind::kExact;
  StoppingRule stop = StoppingRule::full();
  double budget_ratio = 0.2;                 ///< bandits: T = ratio * n * d
  std::optional<std::uint64_t> budget;       ///< absolute T, overrides the ratio
  std::size_t batch_size = 1;
  PermutationKind permutation = PermutationKind::kWeightOrder;
  std::optional<std::size_t> log_divisor;
  std::size_t max_draws = 0;                 ///< randomized: draw cap (0 means n)

  static SelectorConfig parse(std::string_view id);
  std::string id() const;
  /// Identifier plus the parameter that distinguishes cells, e.g. "halving-nonstoch@0.2".
  std::string label() const;

  bool is_bandit() const noexcept;
  bool uses_stopping() const noexcept;
  std::uint64_t resolve_budget(Index n, Index d) const;
};

/// Dispatches to the configured selector.
SelectorOutcome select(const SelectorConfig& config, const DesignMatrix& x, const ResidualVector& r,
                       const SelectorMode& mode, Rng& rng, const SelectOptions& opts = {});

}  // namespace sparsex
