#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsex/linalg.hpp"

namespace sparsex {

struct SelectorOutcome;

/// When an accumulation-based selector (greedy, randomized) stops adding
/// row contributions.
///
///   STABILITY    stop once the extreme coordinate(s) are unchanged for n_s
///                consecutive accumulation steps. n_s may be given as a
///                percentage of n, resolved per call.
///   ERROR_BOUND  stop once sum_{i not yet used} ||x_i||_inf |r_i| <= eps,
///                which bounds ||estimate - X^T r||_inf. Without an explicit
///                eps, eps = 1e-3 * (initial total mass).
///   FULL         accumulate everything.
struct StoppingRule {
  enum class Kind { kStability, kErrorBound, kFull };

  Kind kind = Kind::kFull;
  std::size_t n_s = 1;
  double n_s_percent = 0.0;  ///< > 0 means n_s = ceil(percent/100 * n)
  std::optional<double> epsilon;

  static StoppingRule stability(std::size_t n_s);
  static StoppingRule stability_percent(double percent);
  static StoppingRule error_bound(double epsilon);
  static StoppingRule error_bound_default();
  static StoppingRule full() { return {}; }

  /// Parses `stability:<N_s>`, `stability-frac:<pct>`, `errbound:<eps>`,
  /// `errbound` (default eps) or `full`.
  static StoppingRule parse(std::string_view id);
  std::string id() const;

  /// Resolved N_s for an n-row problem (at least 1).
  std::size_t stability_window(Index n) const;
};

/// Tracks how long the extreme coordinate set has been unchanged. The first
/// observation of a new extreme counts as streak 1, so the rule fires on the
/// n_s-th consecutive identical observation.
class StabilityTracker {
 public:
  explicit StabilityTracker(std::size_t n_s);

  bool step(Index new_extreme);
  /// Order-insensitive comparison of the whole extreme set (top-m modes).
  bool step(std::span<const Index> new_extreme);

  std::size_t streak() const noexcept { return streak_; }
  const std::vector<Index>& current() const noexcept { return current_; }

 private:
  std::size_t n_s_;
  std::size_t streak_ = 0;
  std::vector<Index> current_;
  bool has_current_ = false;
};

/// Remaining accumulation mass for the error-bound rule.
class ErrorBoundTracker {
 public:
  /// `masses[i]` = ||x_i||_inf |r_i|.
  ErrorBoundTracker(std::span<const double> masses, double epsilon);

  /// Fires before any accumulation when eps >= total mass.
  bool fired() const noexcept { return remaining_ <= epsilon_; }
  bool step(Index consumed_row);

  double remaining_mass() const noexcept { return remaining_; }
  double total_mass() const noexcept { return total_; }
  double epsilon() const noexcept { return epsilon_; }

 private:
  std::span<const double> masses_;
  double epsilon_;
  double total_ = 0.0;
  double consumed_ = 0.0;
  double remaining_ = 0.0;
  std::size_t steps_ = 0;
};

/// Runs `run_with_budget(T0)`, `run_with_budget(2 T0)`, ... until two
/// consecutive runs return the same index set or `max_doublings` doublings
/// are spent. Runs are independent; macs are summed across runs.
SelectorOutcome doubling_trick(const std::function<SelectorOutcome(std::uint64_t)>& run_with_budget,
                               std::uint64_t initial_budget, std::size_t max_doublings);

}  // namespace sparsex
