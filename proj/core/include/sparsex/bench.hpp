#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsex/selectors.hpp"
#include "sparsex/solvers.hpp"
#include "sparsex/synth.hpp"

namespace sparsex::bench {

/// One (solver, selector, stopping) cell of the experiment matrix.
struct CellSpec {
  SolverConfig solver;                 ///< sparsity is filled in per k
  SelectorConfig selector;
  std::optional<double> rho;           ///< FW radius; default ||w*||_1

  /// Value written to the `stopping` column ("none" for selectors that ignore it).
  std::string stopping_label() const;
  std::string key() const;
};

struct ExperimentSpec {
  Index n = 500;
  Index d = 1000;
  std::vector<Index> k_values{20};
  double snr_db = 3.0;
  std::size_t trials = 20;
  std::uint64_t master_seed = 1;
  std::vector<CellSpec> cells;
  std::size_t jobs = 1;
  double gamma = 1e-3;                 ///< F-measure support threshold
  std::filesystem::path out;

  void validate() const;
};

/// Parses the plain-text config: `[experiment]` and repeated `[cell]`
/// sections of `key = value` lines; '#' starts a comment.
ExperimentSpec parse_experiment_config(std::istream& in);
ExperimentSpec load_experiment_config(const std::filesystem::path& path);

/// Parses a cell from its keys (solver, selector, stopping, budget_ratio,
/// budget, rho, max_iterations, fw_step, fw_constraint, permutation,
/// log_divisor, max_draws).
CellSpec make_cell(const std::vector<std::pair<std::string, std::string>>& keys);

struct TrialRecord {
  std::size_t trial = 0;
  std::string solver;
  std::string selector;
  std::string stopping;
  Index n = 0;
  Index d = 0;
  Index k = 0;
  double snr = 0.0;
  double f_measure = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::uint64_t macs = 0;
  double wall_time_ms = 0.0;
  /// 1/0: final gamma-support equals the exact-selector run's on the same
  /// instance; -1 when no exact run is paired.
  int agree_exact = -1;
  std::uint64_t seed = 0;
  std::string instance_hash;
  bool failed = false;
  std::string error;
};

/// Seed of the instance for (k, trial); independent of job scheduling.
std::uint64_t trial_seed(std::uint64_t master_seed, Index k, std::size_t trial);

using RecordSink = std::function<void(const TrialRecord&)>;

/// Runs every (k, trial) task; within a task all cells share one instance.
/// Records reach `sink` in (k, trial, cell) order regardless of `jobs`.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RecordSink& sink = {});

inline constexpr const char* kCsvHeader =
    "trial,solver,selector,stopping,n,d,k,snr,f_measure,residual,iterations,macs,wall_time_ms,agree_exact,seed,"
    "instance_hash";

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TrialRecord& record);
void write_json_line(std::ostream& out, const TrialRecord& record);
std::vector<TrialRecord> read_csv_records(std::istream& in);

class AggregationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellSummary {
  std::string solver;
  std::string selector;
  std::string stopping;
  Index n = 0;
  Index d = 0;
  Index k = 0;
  double snr = 0.0;
  std::size_t count = 0;
  std::size_t failures = 0;
  double f_mean = 0.0;
  double f_std = 0.0;
  double time_mean = 0.0;
  double time_std = 0.0;
  double macs_mean = 0.0;
  double macs_std = 0.0;
  /// exact cell mean / this cell mean, same solver and k; nullopt without an exact cell.
  std::optional<double> speedup_macs;
  std::optional<double> speedup_time;
};

/// Mean and sample standard deviation per (solver, selector, stopping, k)
/// cell. Throws AggregationError when a cell mixes n, d or snr.
std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records);

void print_summary(std::ostream& out, const std::vector<CellSummary>& summary);

}  // namespace sparsex::bench
