// Invariants of every module, checked over randomized inputs. The acceptance
// binary links this suite in as well.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"

namespace sparsex {
namespace {

using testing::gaussian_matrix;
using testing::gaussian_residual;

const SelectorMode kModes[] = {SelectorMode::min(), SelectorMode::max_abs(), SelectorMode::top_m_abs(3)};

std::vector<Index> sorted(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// ---- core ----

TEST(Properties, CoreOrderInvariance) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto x = gaussian_matrix(50, 17, s);
    const auto r = gaussian_residual(50, s + 1000);
    WorkCounter work;
    const Vector g = full_gradient(x, r, work);
    std::vector<Index> perm(50);
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(s);
    for (Index i = 50; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    Vector acc = Vector::Zero(17);
    for (Index i : perm) acc += r[i] * x.row(i).transpose();
    EXPECT_LE((acc - g).norm(), 1e-10 * g.norm());
  }
}

TEST(Properties, CoreResidualOrthogonalAfterRestrictedSolve) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto inst = testing::make_instance(60, 40, 5, 3.0, s);
    Rng rng(s);
    std::vector<Index> support;
    const std::size_t size = 1 + rng.uniform_index(20);
    while (support.size() < size) {
      const Index j = rng.uniform_index(40);
      if (std::find(support.begin(), support.end(), j) == support.end()) support.push_back(j);
    }
    WorkCounter work;
    const auto sol = restricted_least_squares(inst.x, inst.y, support, work);
    const auto r = compute_residual(inst.x, inst.y, sol.iterate, work);
    for (Index j : support) {
      EXPECT_LE(std::abs(inst.x.col(j).dot(r.values)), 1e-8 * inst.y.norm() * inst.x.col(j).norm());
    }
  }
}

TEST(Properties, CoreWorkCounterMonotone) {
  const auto inst = testing::make_instance(40, 30, 4, 3.0, 3);
  WorkCounter work;
  std::uint64_t prev = 0;
  auto check = [&] {
    EXPECT_GE(work.macs(), prev);
    prev = work.macs();
  };
  SparseIterate w(30);
  auto r = compute_residual(inst.x, inst.y, w, work);
  check();
  std::vector<Index> support;
  for (Index j : {3, 8, 11}) {
    support.push_back(j);
    full_gradient(inst.x, r, work);
    check();
    w = restricted_least_squares(inst.x, inst.y, support, work).iterate;
    check();
    r = compute_residual(inst.x, inst.y, w, work);
    check();
  }
  EXPECT_GT(work.macs(), 0u);
}

TEST(Properties, CoreDesignMatrixAndIterateInvariants) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto m = testing::gaussian_entries(1 + s % 7, 1 + s % 5, s);
    const DesignMatrix x(m);
    for (Index i = 0; i < x.rows(); ++i) {
      EXPECT_NEAR(x.row_l2_norms()[i], m.row(i).norm(), 1e-12 * m.row(i).norm());
      EXPECT_EQ(x.row_linf_norms()[i], m.row(i).cwiseAbs().maxCoeff());
    }
    Vector v = testing::gaussian_vector(12, s);
    for (Eigen::Index j = 0; j < 12; j += 2) v[j] = 0.0;
    const auto w = SparseIterate::from_dense(v);
    EXPECT_TRUE(std::is_sorted(w.support().begin(), w.support().end()));
    EXPECT_EQ(std::adjacent_find(w.support().begin(), w.support().end()), w.support().end());
    EXPECT_EQ(w.support().size(), w.coefficients().size());
    EXPECT_EQ(static_cast<Index>((w.dense().array() != 0.0).count()), w.nnz());
  }
}

// ---- selectors ----

TEST(Properties, SelectorsScaleInvariance) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = gaussian_matrix(40, 15, s);
    const auto r = gaussian_residual(40, s + 50);
    const auto dist = SamplingDistribution::build(r, x.row_l2_norms(), SamplingKind::kImportance);
    for (const auto& mode : kModes) {
      Rng rng(s);
      SelectOptions opts;
      opts.record_log = true;
      const auto out = randomized_selector(x, r, mode, dist, StoppingRule::stability(4), rng, opts);
      const Vector sum = testing::replay(x, out.log);
      const Vector mean = sum / static_cast<double>(out.meta.steps);
      EXPECT_EQ(extreme_indices(mean, mode), out.indices);
      EXPECT_EQ(extreme_indices(sum * 1e3, mode), out.indices);
    }
  }
}

TEST(Properties, SelectorsUnbiasedSingleDrawEstimator) {
  // The estimator's mean over the exact distribution is X^T r; check the
  // Monte-Carlo mean against its own analytic standard error (4 sigma).
  const auto x = gaussian_matrix(50, 20, 11);
  const auto r = gaussian_residual(50, 12);
  const Vector g = testing::transpose_product(x, r);
  for (auto kind : {SamplingKind::kImportance, SamplingKind::kUniform}) {
    const auto dist = SamplingDistribution::build(r, x.row_l2_norms(), kind);
    double variance = 0.0;  // E||Z - g||^2
    for (Index i = 0; i < 50; ++i) {
      const Vector z = (r[i] / dist[i]) * x.row(i).transpose();
      variance += dist[i] * (z - g).squaredNorm();
    }
    const int draws = 100000;
    Rng rng(13);
    Vector mean = Vector::Zero(20);
    for (int t = 0; t < draws; ++t) {
      const Index i = dist.sample(rng);
      mean += (r[i] / dist[i]) * x.row(i).transpose();
    }
    mean /= draws;
    const double rms = std::sqrt(variance / draws);
    EXPECT_LE((mean - g).norm(), 4.0 * rms);
  }
}

TEST(Properties, SelectorsExhaustionEquivalence) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng dims(s);
    const Index n = 2 + dims.uniform_index(60);
    const Index d = 4 + dims.uniform_index(30);
    const auto x = gaussian_matrix(n, d, 10000 + s);
    const auto r = gaussian_residual(n, 20000 + s);
    const std::uint64_t budget = std::uint64_t{n} * d * static_cast<std::uint64_t>(std::ceil(std::log2(d)));
    for (const auto& mode : kModes) {
      const auto exact = exact_selector(x, r, mode).indices;
      EXPECT_EQ(sorted(greedy_deterministic_selector(x, r, mode, StoppingRule::full()).indices), sorted(exact));
      HalvingConfig hc;
      hc.budget = budget;
      hc.loss = BanditLoss::kNonStochastic;
      Rng rng(s);
      const auto halving = mode.kind == SelectorMode::Kind::kTopMAbs
                               ? successive_halving_top_m(x, r, mode.m, hc, rng)
                               : successive_halving_selector(x, r, mode, hc, rng);
      EXPECT_EQ(sorted(halving.indices), sorted(exact));
      EXPECT_EQ(sorted(stochastic_minibatch_selector(x, r, mode, n, rng).indices), sorted(exact));
    }
  }
}

std::string fingerprint(const SelectorOutcome& o) {
  std::ostringstream s;
  s.precision(17);
  for (Index j : o.indices) s << j << ',';
  for (double v : o.values) s << v << ',';
  s << '|' << o.macs << '|' << o.meta.steps << '|' << o.meta.distinct_rows << '|' << o.meta.pulls << '|'
    << o.meta.budget << '|' << o.meta.overshoot << '|' << to_string(o.meta.stop_reason) << '|' << o.meta.zero_gradient;
  return s.str();
}

const char* kSelectorIds[] = {"exact",           "greedy", "uniform", "importance", "halving-noniid",
                              "halving-nonstoch", "reject", "stoch:7"};

TEST(Properties, SelectorsDeterministic) {
  const auto x = gaussian_matrix(60, 24, 5);
  const auto r = gaussian_residual(60, 6);
  for (const char* id : kSelectorIds) {
    auto cfg = SelectorConfig::parse(id);
    cfg.stop = StoppingRule::stability(5);
    for (const auto& mode : kModes) {
      Rng a(99), b(99);
      EXPECT_EQ(fingerprint(select(cfg, x, r, mode, a)), fingerprint(select(cfg, x, r, mode, b))) << id;
    }
  }
}

TEST(Properties, SelectorsOutcomeIndicesDistinctInRange) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = gaussian_matrix(30, 20, s);
    const auto r = gaussian_residual(30, s + 7);
    for (const char* id : kSelectorIds) {
      auto cfg = SelectorConfig::parse(id);
      cfg.stop = StoppingRule::stability(3);
      for (const auto& mode : {SelectorMode::max_abs(), SelectorMode::top_m_abs(6)}) {
        Rng rng(s);
        const auto out = select(cfg, x, r, mode, rng);
        EXPECT_EQ(out.indices.size(), mode.m) << id;
        const auto u = sorted(out.indices);
        EXPECT_EQ(std::adjacent_find(u.begin(), u.end()), u.end()) << id;
        for (Index j : u) EXPECT_LT(j, 20u);
        EXPECT_EQ(out.values.size(), out.indices.size());
      }
    }
  }
}

TEST(Properties, SelectorsBudgetAccountingAndWorkFormulas) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Index n = 80, d = 33;
    const auto x = gaussian_matrix(n, d, s);
    const auto r = gaussian_residual(n, s + 3);
    const std::uint64_t sort = static_cast<std::uint64_t>(std::ceil(n * std::log2(double(n))));
    for (std::uint64_t budget : {std::uint64_t{d}, std::uint64_t{500}, std::uint64_t{n * d / 5}, std::uint64_t{n * d * 7}}) {
      for (auto loss : {BanditLoss::kNonIidStochastic, BanditLoss::kNonStochastic}) {
        HalvingConfig hc;
        hc.budget = budget;
        hc.loss = loss;
        Rng rng(s);
        SelectOptions opts;
        opts.record_log = true;
        const auto out = successive_halving_selector(x, r, SelectorMode::max_abs(), hc, rng, opts);
        EXPECT_LE(out.meta.pulls, budget + out.meta.overshoot);
        // One unit per (survivor, effective pull): replay the round structure.
        std::uint64_t expected = loss == BanditLoss::kNonStochastic ? sort : 0;
        std::size_t next = 0;
        for (std::size_t round = 0; round < out.log.rounds.size(); ++round) {
          std::size_t pulls_this_round = 0;
          while (next < out.log.contributions.size() && out.log.contributions[next].round == round) {
            ++pulls_this_round;
            ++next;
          }
          expected += pulls_this_round * out.log.rounds[round].size();
        }
        EXPECT_EQ(out.macs, expected);
      }
      Rng rng(s);
      const auto rej = successive_reject_selector(x, r, SelectorMode::max_abs(), budget, rng);
      EXPECT_LE(rej.meta.pulls, budget);
      EXPECT_EQ(rej.macs, rej.meta.pulls);
    }
    const auto g = greedy_deterministic_selector(x, r, SelectorMode::max_abs(), StoppingRule::stability(6));
    EXPECT_EQ(g.macs, g.meta.steps * d * 2 + sort);
    const auto e = greedy_deterministic_selector(x, r, SelectorMode::max_abs(), StoppingRule::error_bound(1.0));
    EXPECT_EQ(e.macs, e.meta.steps * d + sort);
    Rng rng(s);
    const auto dist = SamplingDistribution::build(r, x.row_l2_norms(), SamplingKind::kUniform);
    const auto u = randomized_selector(x, r, SelectorMode::max_abs(), dist, StoppingRule::stability(6), rng);
    EXPECT_EQ(u.macs, u.meta.steps * d * 2);
    EXPECT_EQ(stochastic_minibatch_selector(x, r, SelectorMode::max_abs(), 9, rng).macs, 9u * d);
    EXPECT_EQ(exact_selector(x, r, SelectorMode::max_abs()).macs, std::uint64_t{n} * d);
  }
}

TEST(Properties, SelectorsNonIidSharedDrawsAndArmScores) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = gaussian_matrix(50, 20, s);
    const auto r = gaussian_residual(50, s + 9);
    HalvingConfig hc;
    hc.budget = 400;
    hc.loss = BanditLoss::kNonIidStochastic;
    Rng rng(s);
    SelectOptions opts;
    opts.record_log = true;
    const auto out = successive_halving_selector(x, r, SelectorMode::max_abs(), hc, rng, opts);
    ASSERT_FALSE(out.log.rounds.empty());
    // Every draw is shared; an arm's score is the replayed sum over the draws
    // of every round it survived into.
    Vector running = Vector::Zero(20);
    std::size_t next = 0;
    std::vector<std::size_t> prev_pulls(20, 0);
    for (std::size_t round = 0; round < out.log.rounds.size(); ++round) {
      while (next < out.log.contributions.size() && out.log.contributions[next].round == round) {
        const auto& c = out.log.contributions[next++];
        EXPECT_EQ(c.arm, Contribution::kShared);
        running += c.weight * x.row(c.row).transpose();
      }
      for (const auto& arm : out.log.rounds[round]) {
        EXPECT_NEAR(arm.score, running[arm.arm], 1e-9 * (1.0 + std::abs(running[arm.arm])));
        EXPECT_TRUE(std::isfinite(arm.score));
        EXPECT_GE(arm.pulls, prev_pulls[arm.arm]);
        prev_pulls[arm.arm] = arm.pulls;
      }
    }
  }
}

TEST(Properties, SelectorsGradientEstimateReplayable) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = gaussian_matrix(40, 12, s);
    const auto r = gaussian_residual(40, s + 21);
    const auto dist = SamplingDistribution::build(r, x.row_l2_norms(), SamplingKind::kImportance);
    EXPECT_TRUE((dist.probabilities().array() > 0.0).all());
    EXPECT_NEAR(dist.probabilities().sum(), 1.0, 1e-12);
    Rng rng(s);
    SelectOptions opts;
    opts.record_log = true;
    const auto out = randomized_selector(x, r, SelectorMode::max_abs(), dist, StoppingRule::full(), rng, opts, 60);
    const Vector replayed = testing::replay(x, out.log);
    GradientEstimate est(12);
    for (const auto& c : out.log.contributions) est.add(x, c.row, c.weight);
    EXPECT_LE((est.vector - replayed).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + replayed.cwiseAbs().maxCoeff()));
    EXPECT_LE(est.used_indices.size(), est.t);
    EXPECT_EQ(out.meta.distinct_rows, est.used_indices.size());
    EXPECT_EQ(out.values.front(), replayed[out.indices.front()]);

    GradientEstimate full(12);
    for (Index i = 0; i < 40; ++i) full.add(x, i, r[i]);
    WorkCounter work;
    EXPECT_LE((full.vector - full_gradient(x, r, work)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(full.used_indices.size(), 40u);
  }
}

// ---- stopping ----

std::size_t first_firing(const std::vector<Index>& seq, std::size_t n_s) {
  StabilityTracker t(n_s);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (t.step(seq[k])) return k;
  }
  return seq.size();
}

TEST(Properties, StoppingStabilityTranslationCovariant) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Index> seq;
    const std::size_t len = 5 + rng.uniform_index(30);
    for (std::size_t k = 0; k < len; ++k) seq.push_back(rng.uniform_index(3));
    const std::size_t n_s = 1 + rng.uniform_index(5);
    const std::size_t base = first_firing(seq, n_s);
    // Prefix of distinct never-repeating values delays stabilization by its length.
    const std::size_t shift = 1 + rng.uniform_index(6);
    std::vector<Index> shifted;
    for (std::size_t k = 0; k < shift; ++k) shifted.push_back(100 + k);
    shifted.insert(shifted.end(), seq.begin(), seq.end());
    if (n_s == 1) {
      EXPECT_EQ(first_firing(shifted, n_s), 0u);
    } else {
      EXPECT_EQ(first_firing(shifted, n_s), base + shift);
    }
  }
}

TEST(Properties, StoppingErrorBoundSoundAtEveryStep) {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const Index n = 200, d = 30;
    const auto x = gaussian_matrix(n, d, s);
    const auto r = gaussian_residual(n, s + 77);
    const Vector g = testing::transpose_product(x, r);
    SelectOptions opts;
    opts.record_log = true;
    const auto out = greedy_deterministic_selector(x, r, SelectorMode::max_abs(), StoppingRule::full(), opts);
    std::vector<double> masses(n);
    for (Index i = 0; i < n; ++i) masses[i] = x.row_linf_norms()[i] * std::abs(r[i]);
    ErrorBoundTracker tracker(masses, 0.0);
    Vector est = Vector::Zero(d);
    double prev = tracker.remaining_mass();
    EXPECT_LE((est - g).cwiseAbs().maxCoeff(), prev + 1e-12);
    for (const auto& c : out.log.contributions) {
      est += c.weight * x.row(c.row).transpose();
      tracker.step(c.row);
      EXPECT_LE(tracker.remaining_mass(), prev);
      EXPECT_GE(tracker.remaining_mass(), 0.0);
      prev = tracker.remaining_mass();
      EXPECT_LE((est - g).cwiseAbs().maxCoeff(), tracker.remaining_mass() + 1e-10);
    }
  }
}

TEST(Properties, StoppingFullRuleEqualsExact) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto x = gaussian_matrix(25 + s, 11, s);
    const auto r = gaussian_residual(25 + s, s + 5);
    for (const auto& mode : kModes) {
      EXPECT_EQ(sorted(greedy_deterministic_selector(x, r, mode, StoppingRule::full()).indices),
                sorted(exact_selector(x, r, mode).indices));
    }
  }
}

// ---- solvers ----

SelectorConfig config_for(const char* id) {
  auto cfg = SelectorConfig::parse(id);
  cfg.stop = StoppingRule::stability_percent(5.0);
  return cfg;
}

TEST(Properties, SolversOmpSupportGrowthAndMonotoneObjective) {
  for (const char* id : kSelectorIds) {
    for (std::uint64_t s = 0; s < 4; ++s) {
      const auto inst = testing::make_instance(80, 120, 6, 5.0, s);
      Rng rng(s);
      const auto res = gradient_pursuit(inst.x, inst.y, 8, config_for(id), rng);
      double prev = 0.5 * inst.y.squaredNorm();
      std::vector<Index> support;
      for (const auto& rec : res.trace.iterations) {
        ASSERT_EQ(rec.selected.size(), 1u);
        EXPECT_EQ(std::find(support.begin(), support.end(), rec.selected[0]), support.end()) << id;
        support.push_back(rec.selected[0]);
        EXPECT_LE(rec.objective, prev * (1 + 1e-12) + 1e-12) << id;
        prev = rec.objective;
      }
      EXPECT_LE(res.w.nnz(), 8u);
      EXPECT_EQ(support.size(), res.iterations());
      for (Index j : res.w.support()) EXPECT_NE(std::find(support.begin(), support.end(), j), support.end());
    }
  }
}

TEST(Properties, SolversFrankWolfeFeasibility) {
  const auto inst = testing::make_instance(40, 60, 4, 3.0, 8);
  for (const char* id : {"exact", "greedy", "halving-nonstoch", "importance"}) {
    for (auto constraint : {FwConstraint::kL1Ball, FwConstraint::kSimplex}) {
      for (auto step : {FwStep::kExactLineSearch, FwStep::kHarmonic}) {
        for (std::size_t k = 1; k <= 25; k += 3) {
          SolverConfig cfg;
          cfg.algorithm = Algorithm::kFrankWolfe;
          cfg.fw_radius = 0.8 * inst.w_star.l1_norm();
          cfg.fw_constraint = constraint;
          cfg.fw_step = step;
          cfg.max_iterations = k;
          Rng rng(3);
          const auto w = frank_wolfe(inst.x, inst.y, cfg, config_for(id), rng).w;
          if (constraint == FwConstraint::kL1Ball) {
            EXPECT_LE(w.l1_norm(), cfg.fw_radius * (1 + 1e-12)) << id;
          } else {
            for (double c : w.coefficients()) EXPECT_GE(c, 0.0) << id;
            EXPECT_LE(w.l1_norm(), 1.0 + 1e-12) << id;
            if (step == FwStep::kHarmonic) EXPECT_NEAR(w.l1_norm(), 1.0, 1e-12) << id;
          }
        }
      }
    }
  }
}

TEST(Properties, SolversCosampSparsityEveryIteration) {
  const auto inst = testing::make_instance(120, 200, 6, 3.0, 9);
  for (const char* id : {"exact", "greedy", "halving-noniid", "halving-nonstoch", "reject", "stoch:30"}) {
    for (std::size_t it = 1; it <= 6; ++it) {
      SolverConfig cfg;
      cfg.algorithm = Algorithm::kCosamp;
      cfg.sparsity = 6;
      cfg.max_iterations = it;
      Rng rng(4);
      EXPECT_LE(cosamp(inst.x, inst.y, cfg, config_for(id), rng).w.nnz(), 6u) << id;
    }
  }
}

TEST(Properties, SolversCosampExactObjectiveMonotone) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = testing::make_instance(150, 300, 8, 20.0, 100 + s);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::kCosamp;
    cfg.sparsity = 8;
    cfg.max_iterations = 8;
    Rng rng(s);
    const auto res = cosamp(inst.x, inst.y, cfg, SelectorConfig{}, rng);
    double prev = 0.5 * inst.y.squaredNorm();
    for (const auto& rec : res.trace.iterations) {
      EXPECT_LE(rec.objective, prev * (1 + 1e-9));
      prev = rec.objective;
    }
  }
}

TEST(Properties, SolversTraceMacsNondecreasing) {
  const auto inst = testing::make_instance(60, 90, 5, 3.0, 10);
  for (auto algorithm : {Algorithm::kOmp, Algorithm::kFrankWolfe, Algorithm::kCosamp}) {
    SolverConfig cfg;
    cfg.algorithm = algorithm;
    cfg.sparsity = 5;
    cfg.max_iterations = algorithm == Algorithm::kFrankWolfe ? 50 : 0;
    cfg.fw_radius = inst.w_star.l1_norm();
    Rng rng(1);
    const auto res = solve(inst.x, inst.y, cfg, config_for("halving-noniid"), rng);
    std::uint64_t prev = 0;
    for (const auto& rec : res.trace.iterations) {
      EXPECT_GE(rec.macs, prev);
      prev = rec.macs;
    }
    EXPECT_EQ(res.trace.macs, prev);
  }
}

std::string trace_fingerprint(const SolveResult& r) {
  std::ostringstream s;
  s.precision(17);
  for (const auto& rec : r.trace.iterations) {
    for (Index j : rec.selected) s << j << ' ';
    s << rec.objective << ' ' << rec.residual_norm << ' ' << rec.macs << '\n';
  }
  for (Index k = 0; k < r.w.nnz(); ++k) s << r.w.support()[k] << ':' << r.w.coefficients()[k] << ' ';
  return s.str();
}

TEST(Properties, SolversBitReproducible) {
  const auto inst = testing::make_instance(70, 110, 5, 3.0, 11);
  for (auto algorithm : {Algorithm::kOmp, Algorithm::kFrankWolfe, Algorithm::kCosamp}) {
    for (const char* id : {"exact", "uniform", "halving-noniid"}) {
      SolverConfig cfg;
      cfg.algorithm = algorithm;
      cfg.sparsity = 5;
      cfg.max_iterations = algorithm == Algorithm::kFrankWolfe ? 40 : 0;
      cfg.fw_radius = inst.w_star.l1_norm();
      auto sel = SelectorConfig::parse(id);
      sel.stop = StoppingRule::full();
      Rng a(21), b(21);
      EXPECT_EQ(trace_fingerprint(solve(inst.x, inst.y, cfg, sel, a)),
                trace_fingerprint(solve(inst.x, inst.y, cfg, sel, b)));
    }
  }
}

// ---- synth ----

TEST(Properties, SynthInstanceInvariants) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng dims(s);
    const Index n = 5 + dims.uniform_index(80);
    const Index d = 5 + dims.uniform_index(80);
    const Index k = dims.uniform_index(d + 1);
    const double snr = -5.0 + 30.0 * dims.uniform01();
    const auto inst = generate_problem({n, d, k, snr, s});
    for (Index j = 0; j < d; ++j) EXPECT_NEAR(inst.x.col(j).norm(), 1.0, 1e-12);
    EXPECT_EQ(inst.w_star.nnz(), k);
    for (double v : inst.w_star.coefficients()) EXPECT_GE(std::abs(v), 0.1);
    WorkCounter work;
    const Vector signal = compute_residual(inst.x, Vector::Zero(n), inst.w_star, work).values;
    const double sigma2 = signal.squaredNorm() / n * std::pow(10.0, -snr / 10.0);
    EXPECT_NEAR(inst.sigma_e * inst.sigma_e, sigma2, 1e-12 * std::max(1.0, sigma2));
    const auto again = generate_problem({n, d, k, snr, s});
    EXPECT_EQ(again.x.entries(), inst.x.entries());
    EXPECT_EQ(again.y, inst.y);
  }
}

TEST(Properties, SynthFMeasureSymmetricAndBounded) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    Vector a = Vector::Zero(30), b = Vector::Zero(30);
    for (int j = 0; j < 30; ++j) {
      if (rng.uniform01() < 0.3) a[j] = rng.normal();
      if (rng.uniform01() < 0.3) b[j] = rng.normal() * 1e-3 * 2;
    }
    const auto wa = SparseIterate::from_dense(a), wb = SparseIterate::from_dense(b);
    const double f = f_measure(wa, wb);
    EXPECT_EQ(f, f_measure(wb, wa));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

// ---- bench ----

bench::ExperimentSpec property_spec() {
  bench::ExperimentSpec spec;
  spec.n = 50;
  spec.d = 80;
  spec.k_values = {3, 5};
  spec.trials = 3;
  spec.master_seed = 17;
  for (const auto& [solver, selector] : std::vector<std::pair<std::string, std::string>>{
           {"omp", "exact"}, {"omp", "greedy"}, {"cosamp", "halving-nonstoch"}, {"fw", "uniform"}}) {
    auto cell = bench::make_cell({{"solver", solver}, {"selector", selector}});
    if (solver == "fw") cell.solver.max_iterations = 20;
    spec.cells.push_back(cell);
  }
  return spec;
}

TEST(Properties, BenchDeterministicExcludingWallTime) {
  const auto spec = property_spec();
  auto a = bench::run_experiment(spec);
  auto b = bench::run_experiment(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i].wall_time_ms = b[i].wall_time_ms = 0.0;
    std::ostringstream x, y;
    bench::write_csv_row(x, a[i]);
    bench::write_csv_row(y, b[i]);
    EXPECT_EQ(x.str(), y.str());
  }
}

TEST(Properties, BenchPairingByInstanceHash) {
  const auto spec = property_spec();
  const auto records = bench::run_experiment(spec);
  for (const auto& r : records) {
    EXPECT_EQ(r.instance_hash, generate_problem({spec.n, spec.d, r.k, spec.snr_db, r.seed}).hash());
    EXPECT_GT(r.macs, 0u);
  }
  for (std::size_t i = 0; i < records.size(); i += spec.cells.size()) {
    for (std::size_t c = 1; c < spec.cells.size(); ++c) {
      EXPECT_EQ(records[i + c].instance_hash, records[i].instance_hash);
      EXPECT_EQ(records[i + c].trial, records[i].trial);
    }
  }
}

TEST(Properties, BenchWorkAccountingSumsModuleCharges) {
  // Exact OMP: per iteration t (1-based) the selector charges n d, the
  // restricted solve n t^2 + n t and the residual update n t.
  auto spec = property_spec();
  spec.cells.resize(1);
  const auto records = bench::run_experiment(spec);
  for (const auto& r : records) {
    std::uint64_t expected = 0;
    for (std::uint64_t t = 1; t <= r.k; ++t) expected += r.n * r.d + r.n * t * t + 2 * r.n * t;
    EXPECT_EQ(r.macs, expected);
  }
}

}  // namespace
}  // namespace sparsex
