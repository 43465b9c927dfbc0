#include "sparsex/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace sparsex::bench {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::runtime_error("config: bad value '" + text + "' for " + key);
  }
  return value;
}

std::string format_double(double v, int precision = 10) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

/// Support-set comparison used for agree_exact.
bool same_support(const SparseIterate& a, const SparseIterate& b, double gamma) {
  return thresholded_support(a, gamma) == thresholded_support(b, gamma);
}

struct TaskKey {
  Index k;
  std::size_t trial;
};

std::vector<TrialRecord> run_task(const ExperimentSpec& spec, const TaskKey& task) {
  const std::uint64_t seed = trial_seed(spec.master_seed, task.k, task.trial);
  std::vector<TrialRecord> records;
  std::optional<ProblemInstance> instance;
  std::string hash;
  try {
    instance = generate_problem({spec.n, spec.d, task.k, spec.snr_db, seed});
    hash = instance->hash();
  } catch (const std::exception& e) {
    for (const auto& cell : spec.cells) {
      TrialRecord rec;
      rec.trial = task.trial;
      rec.solver = to_string(cell.solver.algorithm);
      rec.selector = cell.selector.label();
      rec.stopping = cell.stopping_label();
      rec.n = spec.n;
      rec.d = spec.d;
      rec.k = task.k;
      rec.snr = spec.snr_db;
      rec.f_measure = std::nan("");
      rec.seed = seed;
      rec.failed = true;
      rec.error = e.what();
      records.push_back(std::move(rec));
    }
    return records;
  }

  auto configure = [&](const CellSpec& cell) {
    SolverConfig cfg = cell.solver;
    cfg.sparsity = task.k;
    if (cfg.algorithm == Algorithm::kFrankWolfe) {
      cfg.fw_radius = cell.rho.value_or(instance->w_star.l1_norm());
    }
    return cfg;
  };

  // Exact runs per solver: explicit exact cells first, hidden references
  // only where CoSaMP's relative stop needs one.
  std::map<Algorithm, SolveResult> exact_runs;
  std::vector<std::optional<SolveResult>> results(spec.cells.size());
  std::vector<std::string> errors(spec.cells.size());
  auto run_cell = [&](std::size_t c, const SolverConfig& cfg) {
    Rng rng(Rng::derive_seed(seed, c + 1));
    try {
      results[c] = solve(instance->x, instance->y, cfg, spec.cells[c].selector, rng);
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  };

  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    const auto& cell = spec.cells[c];
    if (cell.selector.kind != SelectorConfig::Kind::kExact) continue;
    run_cell(c, configure(cell));
    if (results[c] && !exact_runs.contains(cell.solver.algorithm)) exact_runs.emplace(cell.solver.algorithm, *results[c]);
  }
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    const auto& cell = spec.cells[c];
    if (cell.selector.kind == SelectorConfig::Kind::kExact) continue;
    SolverConfig cfg = configure(cell);
    if (cfg.algorithm == Algorithm::kCosamp) {
      if (!exact_runs.contains(Algorithm::kCosamp)) {
        SolverConfig ref = cfg;
        ref.max_iterations = 0;
        Rng rng(Rng::derive_seed(seed, 0));
        try {
          exact_runs.emplace(Algorithm::kCosamp, solve(instance->x, instance->y, ref, SelectorConfig{}, rng));
        } catch (const std::exception&) {
        }
      }
      if (auto it = exact_runs.find(Algorithm::kCosamp); it != exact_runs.end()) {
        cfg.cosamp_reference_residual = it->second.residual_norm;
      }
    }
    run_cell(c, cfg);
  }

  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    const auto& cell = spec.cells[c];
    TrialRecord rec;
    rec.trial = task.trial;
    rec.solver = to_string(cell.solver.algorithm);
    rec.selector = cell.selector.label();
    rec.stopping = cell.stopping_label();
    rec.n = spec.n;
    rec.d = spec.d;
    rec.k = task.k;
    rec.snr = spec.snr_db;
    rec.seed = seed;
    rec.instance_hash = hash;
    if (!results[c]) {
      rec.failed = true;
      rec.error = errors[c];
      rec.f_measure = std::nan("");
      records.push_back(std::move(rec));
      continue;
    }
    const auto& res = *results[c];
    rec.f_measure = f_measure(instance->w_star, res.w, spec.gamma);
    rec.residual = res.residual_norm;
    rec.iterations = res.iterations();
    rec.macs = res.trace.macs;
    rec.wall_time_ms = res.trace.wall_ms;
    if (auto it = exact_runs.find(cell.solver.algorithm); it != exact_runs.end()) {
      rec.agree_exact = same_support(res.w, it->second.w, spec.gamma) ? 1 : 0;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::string CellSpec::stopping_label() const {
  return selector.uses_stopping() ? selector.stop.id() : "none";
}

std::string CellSpec::key() const {
  std::ostringstream s;
  s << to_string(solver.algorithm) << '|' << selector.label() << '|' << stopping_label();
  if (rho) s << "|rho=" << *rho;
  if (solver.max_iterations) s << "|it=" << solver.max_iterations;
  if (solver.algorithm == Algorithm::kFrankWolfe) {
    s << (solver.fw_step == FwStep::kHarmonic ? "|harmonic" : "|linesearch")
      << (solver.fw_constraint == FwConstraint::kSimplex ? "|simplex" : "|l1");
  }
  return s.str();
}

void ExperimentSpec::validate() const {
  if (n < 1 || d < 1) throw std::runtime_error("experiment: n and d must be positive");
  if (trials < 1) throw std::runtime_error("experiment: trials must be at least 1");
  if (k_values.empty()) throw std::runtime_error("experiment: empty k sweep");
  for (Index k : k_values) {
    if (k < 1 || k > d) throw std::runtime_error("experiment: every k must be in [1, d]");
  }
  if (cells.empty()) throw std::runtime_error("experiment: no cells");
  for (const auto& cell : cells) {
    if (cell.selector.is_bandit() && !cell.selector.budget &&
        (!(cell.selector.budget_ratio > 0.0) || !std::isfinite(cell.selector.budget_ratio))) {
      throw std::runtime_error("experiment: budget ratio must be in (0, inf)");
    }
  }
  if (jobs < 1) throw std::runtime_error("experiment: jobs must be at least 1");
}

CellSpec make_cell(const std::vector<std::pair<std::string, std::string>>& keys) {
  CellSpec cell;
  cell.selector.stop = StoppingRule::stability_percent(2.0);
  std::optional<std::string> selector_id;
  for (const auto& [key, value] : keys) {
    if (key == "selector") selector_id = value;
  }
  if (selector_id) {
    const auto stop = cell.selector.stop;
    cell.selector = SelectorConfig::parse(*selector_id);
    cell.selector.stop = stop;
  }
  for (const auto& [key, value] : keys) {
    if (key == "selector") continue;
    if (key == "solver") cell.solver.algorithm = parse_algorithm(value);
    else if (key == "stopping") cell.selector.stop = StoppingRule::parse(value);
    else if (key == "budget_ratio") cell.selector.budget_ratio = parse_number<double>(value, key);
    else if (key == "budget") cell.selector.budget = parse_number<std::uint64_t>(value, key);
    else if (key == "rho") {
      if (value == "auto") cell.rho.reset();
      else cell.rho = parse_number<double>(value, key);
    } else if (key == "max_iterations") cell.solver.max_iterations = parse_number<std::size_t>(value, key);
    else if (key == "fw_step") {
      if (value == "linesearch") cell.solver.fw_step = FwStep::kExactLineSearch;
      else if (value == "harmonic") cell.solver.fw_step = FwStep::kHarmonic;
      else throw std::runtime_error("config: fw_step must be linesearch or harmonic");
    } else if (key == "fw_constraint") {
      if (value == "l1") cell.solver.fw_constraint = FwConstraint::kL1Ball;
      else if (value == "simplex") cell.solver.fw_constraint = FwConstraint::kSimplex;
      else throw std::runtime_error("config: fw_constraint must be l1 or simplex");
    } else if (key == "permutation") {
      if (value == "weight") cell.selector.permutation = PermutationKind::kWeightOrder;
      else if (value == "random") cell.selector.permutation = PermutationKind::kRandom;
      else throw std::runtime_error("config: permutation must be weight or random");
    } else if (key == "log_divisor") cell.selector.log_divisor = parse_number<std::size_t>(value, key);
    else if (key == "max_draws") cell.selector.max_draws = parse_number<std::size_t>(value, key);
    else throw std::runtime_error("config: unknown cell key '" + key + "'");
  }
  return cell;
}

ExperimentSpec parse_experiment_config(std::istream& in) {
  ExperimentSpec spec;
  spec.cells.clear();
  std::string section;
  std::vector<std::pair<std::string, std::string>> cell_keys;
  bool in_cell = false;
  auto flush_cell = [&] {
    if (in_cell) spec.cells.push_back(make_cell(cell_keys));
    cell_keys.clear();
    in_cell = false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section");
      flush_cell();
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (section == "cell") in_cell = true;
      else if (section != "experiment") throw std::runtime_error("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (in_cell) {
      cell_keys.emplace_back(key, value);
    } else if (section == "experiment") {
      if (key == "n") spec.n = parse_number<Index>(value, key);
      else if (key == "d") spec.d = parse_number<Index>(value, key);
      else if (key == "k") {
        spec.k_values.clear();
        for (const auto& part : split(value, ',')) spec.k_values.push_back(parse_number<Index>(part, key));
      } else if (key == "snr") spec.snr_db = parse_number<double>(value, key);
      else if (key == "trials") spec.trials = parse_number<std::size_t>(value, key);
      else if (key == "seed") spec.master_seed = parse_number<std::uint64_t>(value, key);
      else if (key == "jobs") spec.jobs = parse_number<std::size_t>(value, key);
      else if (key == "gamma") spec.gamma = parse_number<double>(value, key);
      else if (key == "out") spec.out = value;
      else throw std::runtime_error("config: unknown experiment key '" + key + "'");
    } else {
      throw std::runtime_error("config line " + std::to_string(line_no) + ": key outside a section");
    }
  }
  flush_cell();
  return spec;
}

ExperimentSpec load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_experiment_config(in);
}

std::uint64_t trial_seed(std::uint64_t master_seed, Index k, std::size_t trial) {
  return Rng::derive_seed(Rng::derive_seed(master_seed, k), trial);
}

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RecordSink& sink) {
  spec.validate();
  std::vector<TaskKey> tasks;
  for (Index k : spec.k_values) {
    for (std::size_t t = 0; t < spec.trials; ++t) tasks.push_back({k, t});
  }

  std::vector<std::optional<std::vector<TrialRecord>>> done(tasks.size());
  std::vector<TrialRecord> all;
  std::size_t flushed = 0;
  auto flush_ready = [&] {
    while (flushed < tasks.size() && done[flushed]) {
      for (auto& rec : *done[flushed]) {
        if (sink) sink(rec);
        all.push_back(std::move(rec));
      }
      done[flushed].reset();
      ++flushed;
    }
  };

  const std::size_t jobs = std::min(spec.jobs, tasks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      done[i] = run_task(spec, tasks[i]);
      flush_ready();
    }
    return all;
  }

  std::mutex mutex;
  std::condition_variable ready;
  std::size_t next = 0;
  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= tasks.size()) return;
        i = next++;
      }
      auto records = run_task(spec, tasks[i]);
      {
        std::lock_guard lock(mutex);
        done[i] = std::move(records);
      }
      ready.notify_one();
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  {
    std::unique_lock lock(mutex);
    while (flushed < tasks.size()) {
      ready.wait(lock, [&] { return done[flushed].has_value(); });
      flush_ready();
    }
  }
  return all;
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_row(std::ostream& out, const TrialRecord& r) {
  out << r.trial << ',' << r.solver << ',' << r.selector << ',' << r.stopping << ',' << r.n << ',' << r.d << ','
      << r.k << ',' << format_double(r.snr) << ',' << format_double(r.f_measure) << ',' << format_double(r.residual)
      << ',' << r.iterations << ',' << r.macs << ',' << format_double(r.wall_time_ms, 6) << ',' << r.agree_exact
      << ',' << r.seed << ',' << r.instance_hash << '\n';
}

void write_json_line(std::ostream& out, const TrialRecord& r) {
  nlohmann::json j{{"trial", r.trial},
                   {"solver", r.solver},
                   {"selector", r.selector},
                   {"stopping", r.stopping},
                   {"n", r.n},
                   {"d", r.d},
                   {"k", r.k},
                   {"snr", r.snr},
                   {"f_measure", std::isnan(r.f_measure) ? nlohmann::json(nullptr) : nlohmann::json(r.f_measure)},
                   {"residual", r.residual},
                   {"iterations", r.iterations},
                   {"macs", r.macs},
                   {"wall_time_ms", r.wall_time_ms},
                   {"agree_exact", r.agree_exact},
                   {"seed", r.seed},
                   {"instance_hash", r.instance_hash}};
  if (r.failed) j["error"] = r.error;
  out << j.dump() << '\n';
}

std::vector<TrialRecord> read_csv_records(std::istream& in) {
  std::vector<TrialRecord> records;
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) throw std::runtime_error("records: missing or wrong CSV header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 16) throw std::runtime_error("records: expected 16 fields, got " + std::to_string(f.size()));
    TrialRecord r;
    r.trial = parse_number<std::size_t>(f[0], "trial");
    r.solver = f[1];
    r.selector = f[2];
    r.stopping = f[3];
    r.n = parse_number<Index>(f[4], "n");
    r.d = parse_number<Index>(f[5], "d");
    r.k = parse_number<Index>(f[6], "k");
    r.snr = std::stod(f[7]);
    r.f_measure = f[8] == "nan" ? std::nan("") : std::stod(f[8]);
    r.failed = std::isnan(r.f_measure);
    r.residual = std::stod(f[9]);
    r.iterations = parse_number<std::size_t>(f[10], "iterations");
    r.macs = parse_number<std::uint64_t>(f[11], "macs");
    r.wall_time_ms = std::stod(f[12]);
    r.agree_exact = parse_number<int>(f[13], "agree_exact");
    r.seed = parse_number<std::uint64_t>(f[14], "seed");
    r.instance_hash = f[15];
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw AggregationError("summarize: no records");
  struct Acc {
    CellSummary s;
    std::vector<double> f, t, m;
  };
  std::vector<Acc> cells;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    const std::string key = r.solver + '|' + r.selector + '|' + r.stopping + '|' + std::to_string(r.k);
    auto [it, inserted] = index.emplace(key, cells.size());
    if (inserted) {
      Acc a;
      a.s.solver = r.solver;
      a.s.selector = r.selector;
      a.s.stopping = r.stopping;
      a.s.n = r.n;
      a.s.d = r.d;
      a.s.k = r.k;
      a.s.snr = r.snr;
      cells.push_back(std::move(a));
    }
    auto& acc = cells[it->second];
    if (acc.s.n != r.n || acc.s.d != r.d || acc.s.snr != r.snr) {
      throw AggregationError("summarize: cell " + key + " mixes problem sizes");
    }
    ++acc.s.count;
    if (r.failed) {
      ++acc.s.failures;
      continue;
    }
    acc.f.push_back(r.f_measure);
    acc.t.push_back(r.wall_time_ms);
    acc.m.push_back(static_cast<double>(r.macs));
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) {
      mean = sd = std::nan("");
      return;
    }
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
  };
  std::vector<CellSummary> out;
  for (auto& a : cells) {
    stats(a.f, a.s.f_mean, a.s.f_std);
    stats(a.t, a.s.time_mean, a.s.time_std);
    stats(a.m, a.s.macs_mean, a.s.macs_std);
    out.push_back(a.s);
  }
  for (auto& s : out) {
    for (const auto& e : out) {
      if (e.selector == "exact" && e.solver == s.solver && e.k == s.k && e.macs_mean > 0 && s.macs_mean > 0) {
        s.speedup_macs = e.macs_mean / s.macs_mean;
        if (s.time_mean > 0) s.speedup_time = e.time_mean / s.time_mean;
        break;
      }
    }
  }
  return out;
}

void print_summary(std::ostream& out, const std::vector<CellSummary>& summary) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-7s %-24s %-20s %5s %5s  %-17s %-21s %-12s %s\n", "solver", "selector", "stopping", "k",
                "runs", "f_measure", "time_ms", "macs", "speedup(macs)");
  out << buf;
  for (const auto& s : summary) {
    std::string speed = s.speedup_macs ? format_double(*s.speedup_macs, 3) + "x" : "-";
    std::snprintf(buf, sizeof buf, "%-7s %-24s %-20s %5zu %5zu  %.3f +- %-8.3f %9.1f +- %-8.1f %-12.4g %s%s\n",
                  s.solver.c_str(), s.selector.c_str(), s.stopping.c_str(), s.k, s.count, s.f_mean, s.f_std,
                  s.time_mean, s.time_std, s.macs_mean, speed.c_str(),
                  s.failures ? (" (" + std::to_string(s.failures) + " failed)").c_str() : "");
    out << buf;
  }
}

}  // namespace sparsex::bench
