#include "sparsex/stopping.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sparsex/selectors.hpp"

namespace sparsex {
namespace {

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ContractError("bad number '" + std::string(text) + "' in " + std::string(what));
  }
  return v;
}

}  // namespace

StoppingRule StoppingRule::stability(std::size_t n_s) {
  if (n_s < 1) throw ContractError("stability rule: N_s must be at least 1");
  StoppingRule s;
  s.kind = Kind::kStability;
  s.n_s = n_s;
  return s;
}

StoppingRule StoppingRule::stability_percent(double percent) {
  if (!(percent > 0.0) || percent > 100.0) throw ContractError("stability rule: percentage must be in (0, 100]");
  StoppingRule s;
  s.kind = Kind::kStability;
  s.n_s_percent = percent;
  return s;
}

StoppingRule StoppingRule::error_bound(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ContractError("error-bound rule: epsilon must be positive");
  StoppingRule s;
  s.kind = Kind::kErrorBound;
  s.epsilon = epsilon;
  return s;
}

StoppingRule StoppingRule::error_bound_default() {
  StoppingRule s;
  s.kind = Kind::kErrorBound;
  return s;
}

StoppingRule StoppingRule::parse(std::string_view id) {
  if (id == "full") return full();
  if (id == "errbound") return error_bound_default();
  if (id.starts_with("errbound:")) return error_bound(parse_double(id.substr(9), id));
  if (id.starts_with("stability-frac:")) return stability_percent(parse_double(id.substr(15), id));
  if (id.starts_with("stability:")) {
    const auto arg = id.substr(10);
    std::size_t n_s = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), n_s);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw ContractError("bad N_s in '" + std::string(id) + "'");
    }
    return stability(n_s);
  }
  throw ContractError("unknown stopping rule '" + std::string(id) + "'");
}

std::string StoppingRule::id() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::kFull: return "full";
    case Kind::kStability:
      if (n_s_percent > 0.0) s << "stability-frac:" << n_s_percent;
      else s << "stability:" << n_s;
      return s.str();
    case Kind::kErrorBound:
      if (!epsilon) return "errbound";
      s << "errbound:" << *epsilon;
      return s.str();
  }
  return "?";
}

std::size_t StoppingRule::stability_window(Index n) const {
  if (n_s_percent > 0.0) {
    const auto w = static_cast<std::size_t>(std::ceil(n_s_percent / 100.0 * static_cast<double>(n)));
    return std::max<std::size_t>(1, w);
  }
  return std::max<std::size_t>(1, n_s);
}

StabilityTracker::StabilityTracker(std::size_t n_s) : n_s_(n_s) {
  if (n_s_ < 1) throw ContractError("StabilityTracker: N_s must be at least 1");
}

bool StabilityTracker::step(Index new_extreme) {
  const Index one[] = {new_extreme};
  return step(std::span<const Index>(one));
}

bool StabilityTracker::step(std::span<const Index> new_extreme) {
  std::vector<Index> sorted(new_extreme.begin(), new_extreme.end());
  std::sort(sorted.begin(), sorted.end());
  if (has_current_ && sorted == current_) {
    ++streak_;
  } else {
    current_ = std::move(sorted);
    has_current_ = true;
    streak_ = 1;
  }
  return streak_ >= n_s_;
}

ErrorBoundTracker::ErrorBoundTracker(std::span<const double> masses, double epsilon)
    : masses_(masses), epsilon_(epsilon) {
  if (epsilon < 0.0 || !std::isfinite(epsilon)) throw ContractError("ErrorBoundTracker: epsilon must be >= 0");
  for (double m : masses_) {
    if (m < 0.0 || !std::isfinite(m)) throw ContractError("ErrorBoundTracker: masses must be finite and >= 0");
    total_ += m;
  }
  remaining_ = total_;
}

bool ErrorBoundTracker::step(Index consumed_row) {
  consumed_ += masses_[consumed_row];
  ++steps_;
  // Once every row is consumed the tail is empty; skip the rounding residue.
  remaining_ = steps_ >= masses_.size() ? 0.0 : std::max(0.0, total_ - consumed_);
  return fired();
}

SelectorOutcome doubling_trick(const std::function<SelectorOutcome(std::uint64_t)>& run_with_budget,
                               std::uint64_t initial_budget, std::size_t max_doublings) {
  if (initial_budget == 0) throw ContractError("doubling_trick: initial budget must be positive");
  auto same_arms = [](const SelectorOutcome& a, const SelectorOutcome& b) {
    auto x = a.indices;
    auto y = b.indices;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  };

  std::uint64_t budget = initial_budget;
  SelectorOutcome previous = run_with_budget(budget);
  std::uint64_t total_macs = previous.macs;
  std::size_t runs = 1;
  for (std::size_t doubling = 0; doubling < max_doublings; ++doubling) {
    budget *= 2;
    SelectorOutcome current = run_with_budget(budget);
    total_macs += current.macs;
    ++runs;
    const bool agree = same_arms(previous, current);
    previous = std::move(current);
    if (agree) {
      previous.macs = total_macs;
      previous.meta.runs = runs;
      previous.meta.budget = budget;
      previous.meta.stop_reason = StopReason::kAgreement;
      return previous;
    }
  }
  previous.macs = total_macs;
  previous.meta.runs = runs;
  previous.meta.budget = budget;
  previous.meta.no_agreement = true;
  previous.meta.stop_reason = StopReason::kNoAgreement;
  return previous;
}

}  // namespace sparsex
