#include "sparsex/selectors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sparsex {
namespace {

bool is_excluded(std::span<const std::uint8_t> excluded, Index j) {
  return !excluded.empty() && excluded[j] != 0;
}

std::size_t ceil_log2(std::size_t v) {
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < v) ++bits;
  return bits;
}

std::uint64_t sort_charge(Index n) {
  if (n < 2) return 0;
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) * std::log2(static_cast<double>(n))));
}

std::vector<Index> active_arms(Index d, std::span<const std::uint8_t> excluded) {
  std::vector<Index> arms;
  arms.reserve(d);
  for (Index j = 0; j < d; ++j) {
    if (!is_excluded(excluded, j)) arms.push_back(j);
  }
  if (arms.empty()) throw ContractError("selector: every coordinate is excluded");
  return arms;
}

void check_inputs(const DesignMatrix& x, const ResidualVector& r, const SelectorMode& mode,
                  const SelectOptions& opts) {
  if (r.size() != x.rows()) throw ContractError("selector: residual length differs from n");
  if (!opts.excluded.empty() && opts.excluded.size() != x.cols()) {
    throw ContractError("selector: exclusion mask length differs from d");
  }
  if (mode.m < 1 || mode.m > x.cols()) throw ContractError("selector: m out of range");
}

std::vector<double> values_at(const Vector& g, const std::vector<Index>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (Index j : idx) out.push_back(g[static_cast<Eigen::Index>(j)]);
  return out;
}

/// Zero residual: every coordinate is an extreme; return the first ones.
SelectorOutcome zero_gradient_outcome(Index d, const SelectorMode& mode, const SelectOptions& opts) {
  SelectorOutcome out;
  out.mode = mode;
  auto arms = active_arms(d, opts.excluded);
  arms.resize(std::min(arms.size(), mode.m));
  out.indices = std::move(arms);
  out.values.assign(out.indices.size(), 0.0);
  out.meta.zero_gradient = true;
  out.meta.stop_reason = StopReason::kZeroGradient;
  return out;
}

/// Row order by decreasing |r_i| ||x_i||_2, ties by smaller row.
std::vector<Index> weight_order(const DesignMatrix& x, const ResidualVector& r) {
  const Index n = x.rows();
  std::vector<double> weight(n);
  for (Index i = 0; i < n; ++i) weight[i] = std::abs(r[i]) * x.row_l2_norms()[static_cast<Eigen::Index>(i)];
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return weight[a] > weight[b]; });
  return order;
}

/// Orders arms best-first for the mode. MIN: increasing score; otherwise
/// decreasing |score|. Ties by smaller arm index.
void rank_arms(std::vector<Index>& arms, const std::vector<double>& score, SelectorMode::Kind kind) {
  if (kind == SelectorMode::Kind::kMin) {
    std::sort(arms.begin(), arms.end(), [&](Index a, Index b) {
      return score[a] < score[b] || (score[a] == score[b] && a < b);
    });
  } else {
    std::sort(arms.begin(), arms.end(), [&](Index a, Index b) {
      const double fa = std::abs(score[a]);
      const double fb = std::abs(score[b]);
      return fa > fb || (fa == fb && a < b);
    });
  }
}

void log_round(SelectorLog& log, const std::vector<Index>& arms, const std::vector<double>& score,
               const std::vector<std::size_t>& pulls) {
  std::vector<ArmState> states;
  states.reserve(arms.size());
  for (Index a : arms) states.push_back({a, score[a], pulls[a]});
  log.rounds.push_back(std::move(states));
}

}  // namespace

SelectorMode SelectorMode::top_m_abs(std::size_t m) {
  if (m < 1) throw ContractError("SelectorMode: m must be positive");
  return {Kind::kTopMAbs, m};
}

std::string to_string(SelectorMode::Kind kind) {
  switch (kind) {
    case SelectorMode::Kind::kMin: return "min";
    case SelectorMode::Kind::kMaxAbs: return "max-abs";
    case SelectorMode::Kind::kTopMAbs: return "top-m-abs";
  }
  return "?";
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kExhausted: return "exhausted";
    case StopReason::kStability: return "stability";
    case StopReason::kErrorBound: return "error-bound";
    case StopReason::kDrawCap: return "draw-cap";
    case StopReason::kBudgetSpent: return "budget-spent";
    case StopReason::kZeroGradient: return "zero-gradient";
    case StopReason::kAgreement: return "agreement";
    case StopReason::kNoAgreement: return "no-agreement";
  }
  return "?";
}

std::vector<Index> extreme_indices(const Vector& g, const SelectorMode& mode, std::span<const std::uint8_t> excluded) {
  const Index d = static_cast<Index>(g.size());
  if (!excluded.empty() && excluded.size() != d) throw ContractError("extreme_indices: mask length");
  switch (mode.kind) {
    case SelectorMode::Kind::kMin:
    case SelectorMode::Kind::kMaxAbs: {
      const bool want_min = mode.kind == SelectorMode::Kind::kMin;
      Index best = d;
      double best_value = 0.0;
      for (Index j = 0; j < d; ++j) {
        if (is_excluded(excluded, j)) continue;
        const double v = want_min ? g[static_cast<Eigen::Index>(j)] : std::abs(g[static_cast<Eigen::Index>(j)]);
        if (best == d || (want_min ? v < best_value : v > best_value)) {
          best = j;
          best_value = v;
        }
      }
      if (best == d) throw ContractError("extreme_indices: every coordinate is excluded");
      return {best};
    }
    case SelectorMode::Kind::kTopMAbs: {
      auto arms = active_arms(d, excluded);
      const std::size_t m = std::min(mode.m, arms.size());
      auto better = [&](Index a, Index b) {
        const double fa = std::abs(g[static_cast<Eigen::Index>(a)]);
        const double fb = std::abs(g[static_cast<Eigen::Index>(b)]);
        return fa > fb || (fa == fb && a < b);
      };
      std::partial_sort(arms.begin(), arms.begin() + static_cast<std::ptrdiff_t>(m), arms.end(), better);
      arms.resize(m);
      return arms;
    }
  }
  return {};
}

void GradientEstimate::add(const DesignMatrix& x, Index row, double weight) {
  vector.noalias() += weight * x.row(row).transpose();
  ++t;
  macs += x.cols();
  if (seen_.empty()) seen_.assign(x.rows(), 0);
  if (!seen_[row]) {
    seen_[row] = 1;
    used_indices.push_back(row);
  }
}

SamplingDistribution::SamplingDistribution(Vector p) : p_(std::move(p)) {
  cdf_.resize(static_cast<std::size_t>(p_.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p_.size(); ++i) {
    acc += p_[i];
    cdf_[static_cast<std::size_t>(i)] = acc;
  }
}

SamplingDistribution SamplingDistribution::from_probabilities(Vector p) {
  if (p.size() == 0) throw ContractError("SamplingDistribution: empty");
  if (!p.allFinite() || (p.array() <= 0.0).any()) {
    throw ContractError("SamplingDistribution: probabilities must be positive");
  }
  if (std::abs(p.sum() - 1.0) > 1e-12) throw ContractError("SamplingDistribution: probabilities must sum to 1");
  return SamplingDistribution(std::move(p));
}

SamplingDistribution SamplingDistribution::build(const ResidualVector& r, const Vector& row_l2_norms,
                                                 SamplingKind kind) {
  const auto n = static_cast<Eigen::Index>(r.size());
  if (n == 0 || row_l2_norms.size() != n) throw ContractError("SamplingDistribution: dimension mismatch");
  if (!r.values.allFinite()) throw ContractError("SamplingDistribution: residual must be finite");
  auto uniform = [&] { return Vector::Constant(n, 1.0 / static_cast<double>(n)); };
  if (kind == SamplingKind::kUniform) return SamplingDistribution(uniform());

  Vector w = r.values.cwiseAbs().cwiseProduct(row_l2_norms);
  if ((w.array() == 0.0).all()) {
    SamplingDistribution out(uniform());
    out.zero_gradient_ = true;
    return out;
  }
  w = w.cwiseMax(1e-15);
  w /= w.sum();
  return SamplingDistribution(std::move(w));
}

Index SamplingDistribution::sample(Rng& rng) const {
  const double u = rng.uniform01() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<Index>(it - cdf_.begin());
}

SelectorOutcome exact_selector(const DesignMatrix& x, const ResidualVector& r, const SelectorMode& mode,
                               const SelectOptions& opts) {
  check_inputs(x, r, mode, opts);
  if (r.is_zero()) return zero_gradient_outcome(x.cols(), mode, opts);
  WorkCounter work;
  const Vector g = full_gradient(x, r, work);
  SelectorOutcome out;
  out.mode = mode;
  out.indices = extreme_indices(g, mode, opts.excluded);
  out.values = values_at(g, out.indices);
  out.macs = work.macs();
  out.meta.steps = x.rows();
  out.meta.distinct_rows = x.rows();
  out.meta.stop_reason = StopReason::kExhausted;
  return out;
}

SelectorOutcome greedy_deterministic_selector(const DesignMatrix& x, const ResidualVector& r,
                                              const SelectorMode& mode, const StoppingRule& stop,
                                              const SelectOptions& opts) {
  check_inputs(x, r, mode, opts);
  if (r.is_zero()) return zero_gradient_outcome(x.cols(), mode, opts);
  const Index n = x.rows();
  const Index d = x.cols();

  SelectorOutcome out;
  out.mode = mode;
  const std::vector<Index> order = weight_order(x, r);
  out.macs += sort_charge(n);

  GradientEstimate est(d);
  std::optional<StabilityTracker> stability;
  std::optional<ErrorBoundTracker> bound;
  std::vector<double> masses;
  if (stop.kind == StoppingRule::Kind::kStability) stability.emplace(stop.stability_window(n));
  if (stop.kind == StoppingRule::Kind::kErrorBound) {
    masses.resize(n);
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      masses[i] = x.row_linf_norms()[static_cast<Eigen::Index>(i)] * std::abs(r[i]);
      total += masses[i];
    }
    bound.emplace(masses, stop.epsilon.value_or(1e-3 * total));
  }

  StopReason reason = StopReason::kExhausted;
  std::uint64_t overhead = 0;
  if (bound && bound->fired()) {
    reason = StopReason::kErrorBound;
  } else {
    for (Index t = 0; t < n; ++t) {
      const Index i = order[t];
      est.add(x, i, r[i]);
      if (opts.record_log) out.log.contributions.push_back({i, r[i], 0, Contribution::kShared});
      if (stability) {
        overhead += d;
        if (stability->step(extreme_indices(est.vector, mode, opts.excluded))) {
          reason = StopReason::kStability;
          break;
        }
      }
      if (bound && bound->step(i)) {
        reason = StopReason::kErrorBound;
        break;
      }
    }
  }
  if (est.t == n && reason != StopReason::kErrorBound) reason = StopReason::kExhausted;

  out.indices = extreme_indices(est.vector, mode, opts.excluded);
  out.values = values_at(est.vector, out.indices);
  out.macs += est.macs + overhead;
  out.meta.steps = est.t;
  out.meta.distinct_rows = est.used_indices.size();
  out.meta.stop_reason = reason;
  return out;
}

SelectorOutcome randomized_selector(const DesignMatrix& x, const ResidualVector& r, const SelectorMode& mode,
                                    const SamplingDistribution& dist, const StoppingRule& stop, Rng& rng,
                                    const SelectOptions& opts, std::size_t max_draws) {
  check_inputs(x, r, mode, opts);
  if (dist.size() != x.rows()) throw ContractError("randomized_selector: distribution length differs from n");
  if (stop.kind == StoppingRule::Kind::kErrorBound) {
    throw ContractError("randomized_selector: the error-bound rule needs deterministic accumulation");
  }
  if (r.is_zero()) return zero_gradient_outcome(x.cols(), mode, opts);
  const Index n = x.rows();
  const Index d = x.cols();
  const std::size_t cap = max_draws == 0 ? n : max_draws;

  SelectorOutcome out;
  out.mode = mode;
  GradientEstimate est(d);
  std::optional<StabilityTracker> stability;
  if (stop.kind == StoppingRule::Kind::kStability) stability.emplace(stop.stability_window(n));

  StopReason reason = StopReason::kDrawCap;
  std::uint64_t overhead = 0;
  while (est.t < cap) {
    const Index i = dist.sample(rng);
    const double weight = r[i] / dist[i];
    est.add(x, i, weight);
    if (opts.record_log) out.log.contributions.push_back({i, weight, 0, Contribution::kShared});
    if (stability) {
      overhead += d;
      if (stability->step(extreme_indices(est.vector, mode, opts.excluded))) {
        reason = StopReason::kStability;
        break;
      }
    }
  }

  out.indices = extreme_indices(est.vector, mode, opts.excluded);
  out.values = values_at(est.vector, out.indices);
  out.macs = est.macs + overhead;
  out.meta.steps = est.t;
  out.meta.distinct_rows = est.used_indices.size();
  out.meta.stop_reason = reason;
  return out;
}

namespace {

/// Shared engine for both halving variants. `m == 0` means single-arm mode.
SelectorOutcome run_halving(const DesignMatrix& x, const ResidualVector& r, const SelectorMode& mode,
                            const HalvingConfig& config, Rng& rng, const SelectOptions& opts) {
  const Index n = x.rows();
  const Index d = x.cols();
  const bool top_m = mode.kind == SelectorMode::Kind::kTopMAbs;
  const std::size_t m = top_m ? mode.m : 1;

  std::vector<Index> arms = active_arms(d, opts.excluded);
  if (config.budget < arms.size()) throw ContractError("successive halving: budget T must be at least d");

  SelectorOutcome out;
  out.mode = mode;
  out.meta.budget = config.budget;
  out.meta.stop_reason = StopReason::kBudgetSpent;
  if (arms.size() <= m) {
    out.indices = arms;
    out.values.assign(arms.size(), 0.0);
    return out;
  }
  if (r.is_zero()) return zero_gradient_outcome(d, mode, opts);

  const std::size_t rounds = ceil_log2(arms.size());
  const std::size_t divisor = std::max<std::size_t>(1, config.log_divisor.value_or(rounds));

  std::vector<Index> tau;
  if (config.loss == BanditLoss::kNonStochastic) {
    if (config.permutation == PermutationKind::kWeightOrder) {
      tau = weight_order(x, r);
      out.macs += sort_charge(n);
    } else {
      tau.resize(n);
      std::iota(tau.begin(), tau.end(), Index{0});
      for (Index i = n; i > 1; --i) std::swap(tau[i - 1], tau[rng.uniform_index(i)]);
    }
  }

  std::vector<double> score(d, 0.0);
  std::vector<std::size_t> pulls(d, 0);
  std::size_t cursor = 0;  // next position in tau
  std::size_t per_arm = 0;
  std::vector<std::uint8_t> seen(n, 0);
  std::size_t distinct = 0;
  const auto& entries = x.entries();

  for (std::size_t round = 0; round < rounds && arms.size() > m; ++round) {
    std::uint64_t r_l = config.budget / (static_cast<std::uint64_t>(arms.size()) * divisor);
    if (r_l == 0) {
      r_l = 1;
      out.meta.overshoot += arms.size();
    }
    out.meta.pulls += r_l * arms.size();
    per_arm += r_l;
    for (std::uint64_t p = 0; p < r_l; ++p) {
      Index row;
      double weight;
      if (config.loss == BanditLoss::kNonStochastic) {
        if (cursor >= n) break;  // scores frozen at the exact column sums
        row = tau[cursor++];
        weight = r[row];
      } else {
        row = static_cast<Index>(rng.uniform_index(n));
        weight = r[row] * static_cast<double>(n);
      }
      if (!seen[row]) {
        seen[row] = 1;
        ++distinct;
      }
      const auto xi = entries.row(static_cast<Eigen::Index>(row));
      for (Index a : arms) score[a] += weight * xi[static_cast<Eigen::Index>(a)];
      out.macs += arms.size();
      if (opts.record_log) out.log.contributions.push_back({row, weight, round, Contribution::kShared});
    }
    for (Index a : arms) pulls[a] = per_arm;

    rank_arms(arms, score, top_m ? SelectorMode::Kind::kMaxAbs : mode.kind);
    if (opts.record_log) log_round(out.log, arms, score, pulls);
    const std::size_t half = arms.size() / 2;
    if (top_m && half < m) {
      arms.resize(m);
      break;
    }
    arms.resize(std::max<std::size_t>(1, half));
  }
  if (arms.size() > m) arms.resize(m);  // already ranked

  out.indices = arms;
  for (Index a : arms) out.values.push_back(score[a]);
  out.meta.steps = per_arm;
  out.meta.distinct_rows = distinct;
  return out;
}

}  // namespace

SelectorOutcome successive_halving_selector(const DesignMatrix& x, const ResidualVector& r,
                                            const SelectorMode& mode, const HalvingConfig& config, Rng& rng,
                                            const SelectOptions& opts) {
  check_inputs(x, r, mode, opts);
  if (x.cols() < 2) throw ContractError("successive halving: need d >= 2");
  return run_halving(x, r, mode, config, rng, opts);
}

SelectorOutcome successive_halving_top_m(const DesignMatrix& x, const ResidualVector& r, std::size_t m,
                                         const HalvingConfig& config, Rng& rng, const SelectOptions& opts) {
  const SelectorMode mode = SelectorMode::top_m_abs(m);
  check_inputs(x, r, mode, opts);
  return run_halving(x, r, mode, config, rng, opts);
}

std::vector<std::uint64_t> successive_reject_schedule(std::size_t arms, std::uint64_t budget) {
  if (arms < 2) return {};
  if (budget < arms) throw ContractError("successive reject: budget T must be at least d");
  double logbar = 0.5;
  for (std::size_t i = 2; i <= arms; ++i) logbar += 1.0 / static_cast<double>(i);
  std::vector<std::uint64_t> cumulative;
  cumulative.reserve(arms - 1);
  const double spare = static_cast<double>(budget - arms);
  for (std::size_t phase = 1; phase < arms; ++phase) {
    cumulative.push_back(static_cast<std::uint64_t>(
        std::ceil(spare / (logbar * static_cast<double>(arms + 1 - phase)))));
  }
  return cumulative;
}

SelectorOutcome successive_reject_selector(const DesignMatrix& x, const ResidualVector& r,
                                           const SelectorMode& mode, std::uint64_t budget, Rng& rng,
                                           const SelectOptions& opts) {
  check_inputs(x, r, mode, opts);
  const Index n = x.rows();
  const Index d = x.cols();
  const bool top_m = mode.kind == SelectorMode::Kind::kTopMAbs;
  const std::size_t m = top_m ? mode.m : 1;

  std::vector<Index> arms = active_arms(d, opts.excluded);
  const auto schedule = successive_reject_schedule(arms.size(), budget);
  SelectorOutcome out;
  out.mode = mode;
  out.meta.budget = budget;
  out.meta.stop_reason = StopReason::kBudgetSpent;
  if (arms.size() <= m) {
    out.indices = arms;
    out.values.assign(arms.size(), 0.0);
    return out;
  }
  if (r.is_zero()) return zero_gradient_outcome(d, mode, opts);

  const SelectorMode::Kind rank_kind = top_m ? SelectorMode::Kind::kMaxAbs : mode.kind;
  std::vector<double> score(d, 0.0);
  std::vector<std::size_t> pulls(d, 0);
  const double scale = static_cast<double>(n);
  const auto& entries = x.entries();
  std::uint64_t previous = 0;
  for (std::size_t phase = 0; phase < schedule.size() && arms.size() > m; ++phase) {
    const std::uint64_t add = schedule[phase] - previous;
    previous = schedule[phase];
    for (Index a : arms) {
      for (std::uint64_t p = 0; p < add; ++p) {
        const auto row = static_cast<Index>(rng.uniform_index(n));
        const double weight = r[row] * scale;
        score[a] += weight * entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(a));
        if (opts.record_log) out.log.contributions.push_back({row, weight, phase, a});
      }
      pulls[a] += add;
    }
    out.macs += add * arms.size();
    out.meta.pulls += add * arms.size();
    rank_arms(arms, score, rank_kind);
    if (opts.record_log) log_round(out.log, arms, score, pulls);
    arms.pop_back();
  }
  rank_arms(arms, score, rank_kind);
  out.indices = arms;
  for (Index a : arms) out.values.push_back(score[a]);
  out.meta.steps = previous;
  return out;
}

SelectorOutcome stochastic_minibatch_selector(const DesignMatrix& x, const ResidualVector& r,
                                              const SelectorMode& mode, std::size_t batch_size, Rng& rng,
                                              const SelectOptions& opts) {
  check_inputs(x, r, mode, opts);
  const Index n = x.rows();
  if (batch_size < 1 || batch_size > n) throw ContractError("stochastic mini-batch: need 1 <= b <= n");
  if (r.is_zero()) return zero_gradient_outcome(x.cols(), mode, opts);

  std::vector<Index> rows(n);
  std::iota(rows.begin(), rows.end(), Index{0});
  GradientEstimate est(x.cols());
  SelectorOutcome out;
  out.mode = mode;
  for (std::size_t k = 0; k < batch_size; ++k) {
    const auto pick = k + static_cast<std::size_t>(rng.uniform_index(n - k));
    std::swap(rows[k], rows[pick]);
    est.add(x, rows[k], r[rows[k]]);
    if (opts.record_log) out.log.contributions.push_back({rows[k], r[rows[k]], 0, Contribution::kShared});
  }
  out.indices = extreme_indices(est.vector, mode, opts.excluded);
  out.values = values_at(est.vector, out.indices);
  out.macs = est.macs;
  out.meta.steps = est.t;
  out.meta.distinct_rows = est.used_indices.size();
  out.meta.stop_reason = batch_size == n ? StopReason::kExhausted : StopReason::kDrawCap;
  return out;
}

SelectorConfig SelectorConfig::parse(std::string_view id) {
  SelectorConfig c;
  if (id == "exact") c.kind = Kind::kExact;
  else if (id == "greedy") c.kind = Kind::kGreedy;
  else if (id == "uniform") c.kind = Kind::kUniform;
  else if (id == "importance") c.kind = Kind::kImportance;
  else if (id == "halving-noniid") c.kind = Kind::kHalvingNonIid;
  else if (id == "halving-nonstoch") c.kind = Kind::kHalvingNonStoch;
  else if (id == "reject") c.kind = Kind::kReject;
  else if (id.starts_with("stoch:")) {
    c.kind = Kind::kMiniBatch;
    const auto arg = id.substr(6);
    std::size_t b = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), b);
    if (ec != std::errc{} || ptr != arg.data() + arg.size() || b == 0) {
      throw ContractError("selector: bad batch size in '" + std::string(id) + "'");
    }
    c.batch_size = b;
  } else {
    throw ContractError("unknown selector '" + std::string(id) + "'");
  }
  return c;
}

std::string SelectorConfig::id() const {
  switch (kind) {
    case Kind::kExact: return "exact";
    case Kind::kGreedy: return "greedy";
    case Kind::kUniform: return "uniform";
    case Kind::kImportance: return "importance";
    case Kind::kHalvingNonIid: return "halving-noniid";
    case Kind::kHalvingNonStoch: return "halving-nonstoch";
    case Kind::kReject: return "reject";
    case Kind::kMiniBatch: return "stoch:" + std::to_string(batch_size);
  }
  return "?";
}

std::string SelectorConfig::label() const {
  if (!is_bandit()) return id();
  std::ostringstream s;
  s << id() << '@';
  if (budget) s << 'T' << *budget;
  else s << budget_ratio;
  return s.str();
}

bool SelectorConfig::is_bandit() const noexcept {
  return kind == Kind::kHalvingNonIid || kind == Kind::kHalvingNonStoch || kind == Kind::kReject;
}

bool SelectorConfig::uses_stopping() const noexcept {
  return kind == Kind::kGreedy || kind == Kind::kUniform || kind == Kind::kImportance;
}

std::uint64_t SelectorConfig::resolve_budget(Index n, Index d) const {
  if (budget) return *budget;
  if (!(budget_ratio > 0.0) || !std::isfinite(budget_ratio)) throw ContractError("selector: budget ratio must be positive");
  return static_cast<std::uint64_t>(std::floor(budget_ratio * static_cast<double>(n) * static_cast<double>(d)));
}

SelectorOutcome select(const SelectorConfig& config, const DesignMatrix& x, const ResidualVector& r,
                       const SelectorMode& mode, Rng& rng, const SelectOptions& opts) {
  switch (config.kind) {
    case SelectorConfig::Kind::kExact:
      return exact_selector(x, r, mode, opts);
    case SelectorConfig::Kind::kGreedy:
      return greedy_deterministic_selector(x, r, mode, config.stop, opts);
    case SelectorConfig::Kind::kUniform:
    case SelectorConfig::Kind::kImportance: {
      const bool importance = config.kind == SelectorConfig::Kind::kImportance;
      const auto dist = SamplingDistribution::build(r, x.row_l2_norms(),
                                                    importance ? SamplingKind::kImportance : SamplingKind::kUniform);
      auto out = randomized_selector(x, r, mode, dist, config.stop, rng, opts, config.max_draws);
      if (importance) out.macs += x.rows();
      return out;
    }
    case SelectorConfig::Kind::kHalvingNonIid:
    case SelectorConfig::Kind::kHalvingNonStoch: {
      HalvingConfig hc;
      hc.budget = config.resolve_budget(x.rows(), x.cols());
      hc.loss = config.kind == SelectorConfig::Kind::kHalvingNonIid ? BanditLoss::kNonIidStochastic
                                                                    : BanditLoss::kNonStochastic;
      hc.permutation = config.permutation;
      hc.log_divisor = config.log_divisor;
      if (mode.kind == SelectorMode::Kind::kTopMAbs) return successive_halving_top_m(x, r, mode.m, hc, rng, opts);
      return successive_halving_selector(x, r, mode, hc, rng, opts);
    }
    case SelectorConfig::Kind::kReject:
      return successive_reject_selector(x, r, mode, config.resolve_budget(x.rows(), x.cols()), rng, opts);
    case SelectorConfig::Kind::kMiniBatch:
      return stochastic_minibatch_selector(x, r, mode, std::min<std::size_t>(config.batch_size, x.rows()), rng, opts);
  }
  throw ContractError("select: unknown selector kind");
}

}  // namespace sparsex
