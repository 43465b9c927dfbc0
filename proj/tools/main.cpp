#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsex/sparsex.hpp"

namespace {

using namespace sparsex;

struct BenchArgs {
  std::string config;
  std::optional<Index> n, d;
  std::vector<Index> k;
  std::optional<double> snr;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> solvers, selectors, stoppings;
  std::vector<double> budget_ratios;
  std::optional<std::string> rho;
  std::optional<std::size_t> jobs;
  std::string out;
  bool quiet = false;
};

std::vector<bench::CellSpec> cross_product(const BenchArgs& a) {
  const std::vector<std::string> solvers = a.solvers.empty() ? std::vector<std::string>{"omp"} : a.solvers;
  const std::vector<std::string> selectors = a.selectors.empty() ? std::vector<std::string>{"exact"} : a.selectors;
  const std::vector<std::string> stoppings =
      a.stoppings.empty() ? std::vector<std::string>{"stability-frac:2"} : a.stoppings;
  const std::vector<double> ratios = a.budget_ratios.empty() ? std::vector<double>{0.2} : a.budget_ratios;

  std::vector<bench::CellSpec> cells;
  std::vector<std::string> seen;
  for (const auto& solver : solvers) {
    for (const auto& selector : selectors) {
      for (const auto& stopping : stoppings) {
        for (double ratio : ratios) {
          bench::CellSpec cell = bench::make_cell({{"solver", solver},
                                                   {"selector", selector},
                                                   {"stopping", stopping},
                                                   {"budget_ratio", std::to_string(ratio)}});
          cell.selector.budget_ratio = ratio;
          if (std::find(seen.begin(), seen.end(), cell.key()) != seen.end()) continue;
          seen.push_back(cell.key());
          cells.push_back(cell);
        }
      }
    }
  }
  return cells;
}

int run_bench(const BenchArgs& a) {
  bench::ExperimentSpec spec;
  if (!a.config.empty()) spec = bench::load_experiment_config(a.config);
  if (a.n) spec.n = *a.n;
  if (a.d) spec.d = *a.d;
  if (!a.k.empty()) spec.k_values = a.k;
  if (a.snr) spec.snr_db = *a.snr;
  if (a.trials) spec.trials = *a.trials;
  if (a.seed) spec.master_seed = *a.seed;
  if (a.jobs) spec.jobs = *a.jobs;
  if (!a.out.empty()) spec.out = a.out;

  if (!a.solvers.empty() || !a.selectors.empty() || spec.cells.empty()) {
    spec.cells = cross_product(a);
  } else {
    for (auto& cell : spec.cells) {
      if (!a.stoppings.empty()) cell.selector.stop = StoppingRule::parse(a.stoppings.front());
      if (!a.budget_ratios.empty()) cell.selector.budget_ratio = a.budget_ratios.front();
    }
  }
  if (a.rho) {
    for (auto& cell : spec.cells) {
      if (*a.rho == "auto") cell.rho.reset();
      else cell.rho = std::stod(*a.rho);
    }
  }
  spec.validate();

  std::ofstream csv_file, json_file;
  std::ostream* csv = &std::cout;
  if (!spec.out.empty()) {
    csv_file.open(spec.out);
    if (!csv_file) throw std::runtime_error("cannot open " + spec.out.string());
    auto json_path = spec.out;
    json_path.replace_extension(".jsonl");
    json_file.open(json_path);
    if (!json_file) throw std::runtime_error("cannot open " + json_path.string());
    csv = &csv_file;
  }
  bench::write_csv_header(*csv);
  bool any_failed = false;
  auto records = bench::run_experiment(spec, [&](const bench::TrialRecord& rec) {
    bench::write_csv_row(*csv, rec);
    csv->flush();
    if (json_file.is_open()) {
      bench::write_json_line(json_file, rec);
      json_file.flush();
    }
    if (rec.failed) {
      any_failed = true;
      std::cerr << "trial " << rec.trial << " " << rec.solver << "/" << rec.selector << " failed: " << rec.error
                << '\n';
    }
  });
  if (!a.quiet) {
    std::ostream& report = spec.out.empty() ? std::cerr : std::cout;
    bench::print_summary(report, bench::summarize(records));
  }
  return any_failed ? 2 : 0;
}

int run_generate(const ProblemParams& params, const std::string& out) {
  const auto instance = generate_problem(params);
  export_instance(instance, out);
  std::cout << "wrote " << out << ".X.sxgm, " << out << ".y.sxgm, " << out << ".meta (hash " << instance.hash()
            << ")\n";
  return 0;
}

struct SolveArgs {
  std::string x, y, solver = "omp", selector = "exact", stopping = "stability-frac:2", trace, out;
  std::size_t k = 0;
  std::optional<double> rho;
  double budget_ratio = 0.2;
  std::size_t max_iterations = 0;
  std::uint64_t seed = 1;
  std::string fw_step = "linesearch", fw_constraint = "l1";
};

int run_solve(const SolveArgs& a) {
  DesignMatrix x(io::read_matrix(a.x));
  const RowMajorMatrix ym = io::read_matrix(a.y);
  if (ym.rows() != 1 && ym.cols() != 1) throw std::runtime_error("y must be a single row or column");
  const Vector y = Eigen::Map<const Vector>(ym.data(), ym.size());

  std::vector<std::pair<std::string, std::string>> keys{{"solver", a.solver},
                                                        {"selector", a.selector},
                                                        {"stopping", a.stopping},
                                                        {"budget_ratio", std::to_string(a.budget_ratio)},
                                                        {"fw_step", a.fw_step},
                                                        {"fw_constraint", a.fw_constraint}};
  if (a.max_iterations) keys.emplace_back("max_iterations", std::to_string(a.max_iterations));
  auto cell = bench::make_cell(keys);
  cell.selector.budget_ratio = a.budget_ratio;
  cell.solver.sparsity = a.k;
  if (cell.solver.algorithm == Algorithm::kFrankWolfe) {
    if (!a.rho) throw std::runtime_error("--rho is required for fw");
    cell.solver.fw_radius = *a.rho;
  } else if (a.k == 0) {
    throw std::runtime_error("--k is required for omp and cosamp");
  }

  std::ofstream trace_file;
  TraceSink sink;
  if (!a.trace.empty()) {
    trace_file.open(a.trace);
    if (!trace_file) throw std::runtime_error("cannot open " + a.trace);
    trace_file << "iteration,selected,objective,residual_norm,macs,wall_ms\n";
    trace_file.precision(12);
    sink = [&](const IterationRecord& rec) {
      trace_file << rec.iteration << ',';
      for (std::size_t i = 0; i < rec.selected.size(); ++i) trace_file << (i ? ";" : "") << rec.selected[i];
      trace_file << ',' << rec.objective << ',' << rec.residual_norm << ',' << rec.macs << ',' << rec.wall_ms << '\n';
    };
  }

  Rng rng(a.seed);
  const auto result = solve(x, y, cell.solver, cell.selector, rng, sink);

  std::ofstream out_file;
  std::ostream& out = a.out.empty() ? std::cout : (out_file.open(a.out), out_file);
  if (!out) throw std::runtime_error("cannot open " + a.out);
  out.precision(17);
  out << "index,coefficient\n";
  for (Index s = 0; s < result.w.nnz(); ++s) out << result.w.support()[s] << ',' << result.w.coefficients()[s] << '\n';
  std::cerr << "status " << to_string(result.trace.status) << ", iterations " << result.iterations() << ", residual "
            << result.residual_norm << ", macs " << result.trace.macs << '\n';
  return 0;
}

int run_summarize(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  bench::print_summary(std::cout, bench::summarize(bench::read_csv_records(in)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse solvers with inexact gradient selection"};
  app.require_subcommand(1);

  BenchArgs b;
  auto* bench_cmd = app.add_subcommand("bench", "Run the solver x selector experiment matrix on synthetic instances");
  bench_cmd->add_option("--config", b.config, "Experiment config file")->check(CLI::ExistingFile);
  bench_cmd->add_option("--n", b.n, "Samples");
  bench_cmd->add_option("--d", b.d, "Atoms");
  bench_cmd->add_option("--k", b.k, "Sparsity sweep, comma separated")->delimiter(',');
  bench_cmd->add_option("--snr", b.snr, "SNR in dB");
  bench_cmd->add_option("--trials", b.trials, "Trials per k");
  bench_cmd->add_option("--seed", b.seed, "Master seed");
  bench_cmd->add_option("--solver", b.solvers, "omp, fw, cosamp (comma separated)")->delimiter(',');
  bench_cmd->add_option("--selector", b.selectors,
                        "exact, greedy, uniform, importance, halving-noniid, halving-nonstoch, reject, stoch:<b>")
      ->delimiter(',');
  bench_cmd->add_option("--stopping", b.stoppings, "stability:<N>, stability-frac:<pct>, errbound[:<eps>], full")
      ->delimiter(',');
  bench_cmd->add_option("--budget-ratio", b.budget_ratios, "Bandit budget T = ratio * n * d")->delimiter(',');
  bench_cmd->add_option("--rho", b.rho, "Frank-Wolfe l1 radius, or 'auto' for ||w*||_1");
  bench_cmd->add_option("--jobs", b.jobs, "Parallel trials")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", b.out, "CSV output path (a .jsonl mirror is written alongside)");
  bench_cmd->add_flag("--quiet", b.quiet, "Skip the summary table");

  ProblemParams g{500, 1000, 20, 3.0, 1};
  std::string g_out;
  auto* gen_cmd = app.add_subcommand("generate", "Write one synthetic instance as SXGM plus metadata");
  gen_cmd->add_option("--n", g.n, "Samples");
  gen_cmd->add_option("--d", g.d, "Atoms");
  gen_cmd->add_option("--k", g.k, "Nonzeros of w*");
  gen_cmd->add_option("--snr", g.snr_db, "SNR in dB");
  gen_cmd->add_option("--seed", g.seed, "Seed");
  gen_cmd->add_option("--out", g_out, "Output prefix")->required();

  SolveArgs s;
  auto* solve_cmd = app.add_subcommand("solve", "Run one solver on a user-supplied matrix");
  solve_cmd->add_option("--x", s.x, "Design matrix (.sxgm or .csv)")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--y", s.y, "Target vector (.sxgm or .csv)")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--solver", s.solver, "omp, fw, cosamp");
  solve_cmd->add_option("--selector", s.selector, "Selector identifier");
  solve_cmd->add_option("--stopping", s.stopping, "Stopping rule identifier");
  solve_cmd->add_option("--k", s.k, "Sparsity K");
  solve_cmd->add_option("--rho", s.rho, "Frank-Wolfe l1 radius");
  solve_cmd->add_option("--fw-step", s.fw_step, "linesearch or harmonic");
  solve_cmd->add_option("--fw-constraint", s.fw_constraint, "l1 or simplex");
  solve_cmd->add_option("--budget-ratio", s.budget_ratio, "Bandit budget ratio");
  solve_cmd->add_option("--max-iterations", s.max_iterations, "Iteration cap (0: solver default)");
  solve_cmd->add_option("--seed", s.seed, "Selector RNG seed");
  solve_cmd->add_option("--trace", s.trace, "Per-iteration trace CSV");
  solve_cmd->add_option("--out", s.out, "Coefficient CSV (default stdout)");

  std::string sum_in;
  auto* sum_cmd = app.add_subcommand("summarize", "Aggregate a bench CSV per cell");
  sum_cmd->add_option("records", sum_in, "Bench CSV")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench_cmd) return run_bench(b);
    if (*gen_cmd) return run_generate(g, g_out);
    if (*solve_cmd) return run_solve(s);
    if (*sum_cmd) return run_summarize(sum_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
