// Command-line front end: gen, solve, bench, oracle.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowprev/decide.hpp"
#include "lowprev/genbench.hpp"
#include "lowprev/harness.hpp"
#include "lowprev/natext.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lowprev;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kVerify = 2, kSolver = 3 };

struct Globals {
  std::uint64_t seed = 42;
  double tol_gap = 1e-8;
  double tol_feas = 1e-9;
  bool json = false;

  SolverOptions solver() const {
    SolverOptions o;
    o.tol_gap = tol_gap;
    o.tol_feas = tol_feas;
    o.validate();
    return o;
  }
};

std::string join(const IndexSet& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << s[i];
  return os.str();
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::size_t omega = 4, dom = 16, k = 16, m = 1, n = 1;
  std::size_t vertices = kDefaultNumVertices;
  double slack = kDefaultMaxSlack;
  bool no_shuffle = false;
  std::string out;
};

int run_gen(const Globals& g, const GenArgs& a) {
  ScenarioSpec spec{a.omega, a.dom, a.k, a.m, a.n, '?', g.seed};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "gen: " << e.what() << '\n';
    return kUsage;
  }
  GenerationOptions opts;
  opts.num_vertices = a.vertices;
  opts.max_slack = a.slack;
  opts.shuffle = !a.no_shuffle;
  const GeneratedSet set = generate_problem(spec, opts);

  ProblemMeta meta{a.m, a.n, g.seed, set.claimed_maximal, set.claimed_interval_dominant};
  if (a.out.empty() || a.out == "-") {
    std::cout << problem_to_json(set.problem, meta).dump(1) << '\n';
  } else {
    write_problem(a.out, set.problem, meta);
    if (!g.json) std::cerr << "wrote " << a.out << " (k=" << a.k << ", m=" << a.m << ", n=" << a.n << ")\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string file;
  int alg = 2;
  bool id_first = false;
  bool id_only = false;
};

int run_solve(const Globals& g, const SolveArgs& a) {
  const ProblemFile pf = read_problem(a.file);
  const NaturalExtension ne(pf.problem.prevision, g.solver());
  const auto& K = pf.problem.gambles;

  std::optional<IndexSet> maximal, id;
  AlgorithmStats stats;
  std::string label;
  if (a.id_only) {
    auto r = interval_dominant(ne, K);
    id = r.indices;
    stats = r.stats;
    label = "id_only";
  } else {
    const auto alg = static_cast<MaxAlgorithm>(a.alg);
    if (a.id_first) {
      auto [sets, st] = maximal_with_id_prefilter(ne, K, alg);
      maximal = sets.maximal_indices;
      id = sets.interval_dominant_indices;
      stats = st;
    } else {
      auto r = find_maximal(ne, K, alg);
      maximal = r.indices;
      stats = r.stats;
    }
    label = std::string(to_string(alg)) + (a.id_first ? "+id" : "");
  }

  double mean_block = 0.0;
  for (auto b : stats.p0_block_sizes) mean_block += static_cast<double>(b);
  if (!stats.p0_block_sizes.empty()) mean_block /= static_cast<double>(stats.p0_block_sizes.size());

  if (g.json) {
    json j;
    j["algorithm"] = label;
    j["k"] = K.size();
    if (maximal) j["maximal"] = *maximal;
    if (id) j["interval_dominant"] = *id;
    j["lp_solve_count"] = stats.lp_solve_count;
    j["comparison_solves"] = stats.comparison_solves;
    j["id_solves"] = stats.id_solves;
    j["seed_solves"] = stats.seed_solves;
    j["ipm_iterations"] = stats.total_ipm_iterations;
    j["early_stops_primal"] = stats.early_stops_primal;
    j["early_stops_dual"] = stats.early_stops_dual;
    j["wall_time_ms"] = stats.wall_time_ms();
    if (!stats.p0_block_sizes.empty()) {
      j["p0_block_sizes"] = stats.p0_block_sizes;
      j["mean_p0_block_size"] = mean_block;
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "algorithm: " << label << '\n';
    if (maximal) std::cout << "maximal (" << maximal->size() << "): " << join(*maximal) << '\n';
    if (id) std::cout << "interval dominant (" << id->size() << "): " << join(*id) << '\n';
    std::cout << "lp_solve_count: " << stats.lp_solve_count << " (comparisons " << stats.comparison_solves
              << ", interval dominance " << stats.id_solves << ", seed " << stats.seed_solves << ")\n"
              << "ipm_iterations: " << stats.total_ipm_iterations << '\n'
              << "early stops: primal " << stats.early_stops_primal << ", dual " << stats.early_stops_dual << '\n';
    if (!stats.p0_block_sizes.empty()) std::cout << "mean P0' blocks: " << mean_block << '\n';
    std::cout << "wall_time_ms: " << stats.wall_time_ms() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string file;
};

int run_oracle(const Globals& g, const OracleArgs& a) {
  const ProblemFile pf = read_problem(a.file);
  OracleOptions oo;
  oo.tol_feas = g.tol_feas;
  const IndexSet mx = maximal_bruteforce(pf.problem, oo);
  const IndexSet id = interval_dominant_bruteforce(pf.problem, oo);

  std::vector<std::string> problems;
  const auto& meta = pf.meta;
  if (meta.m && *meta.m != mx.size()) {
    problems.push_back("claimed m = " + std::to_string(*meta.m) + ", found " + std::to_string(mx.size()));
  }
  if (meta.n && *meta.n != id.size()) {
    problems.push_back("claimed n = " + std::to_string(*meta.n) + ", found " + std::to_string(id.size()));
  }
  auto compare = [&](const char* what, const std::optional<IndexSet>& claimed, const IndexSet& found) {
    if (!claimed || *claimed == found) return;
    IndexSet sorted = *claimed;
    std::sort(sorted.begin(), sorted.end());
    problems.push_back(std::string(what) + ": claimed only {" + join(set_difference(sorted, found)) +
                       "}, found only {" + join(set_difference(found, sorted)) + "}");
  };
  compare("maximal", meta.maximal_indices, mx);
  compare("interval dominant", meta.interval_dominant_indices, id);

  if (g.json) {
    json j{{"m", mx.size()}, {"n", id.size()}, {"maximal", mx}, {"interval_dominant", id},
           {"match", problems.empty()}, {"mismatches", problems}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "verdict: (" << mx.size() << ", " << id.size() << ")\n"
              << "maximal: " << join(mx) << '\n'
              << "interval dominant: " << join(id) << '\n';
  }
  for (const auto& p : problems) std::cerr << "mismatch: " << p << '\n';
  return problems.empty() ? kOk : kVerify;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string grid = "desk";
  std::vector<std::size_t> ks, omegas, doms;
  std::string options;
  std::optional<std::size_t> reps;
  unsigned jobs = 1;
  std::string out = "results.csv";
  std::string summary;
  std::string plot_dir;
  bool quiet = false;
};

int run_bench_cmd(const Globals& g, const BenchArgs& a) {
  BenchConfig cfg = a.grid == "paper" ? BenchConfig::paper() : BenchConfig::desk();
  if (!a.ks.empty()) cfg.ks = a.ks;
  if (!a.omegas.empty()) cfg.omegas = a.omegas;
  if (!a.doms.empty()) cfg.doms = a.doms;
  if (!a.options.empty()) cfg.options = a.options;
  if (a.reps) cfg.reps = *a.reps;
  cfg.jobs = a.jobs;
  cfg.master_seed = g.seed;
  cfg.solver = g.solver();

  CsvAppender csv(a.out, kResultsHeader);
  const BenchReport report = run_bench(
      cfg,
      [&](const std::vector<RunRecord>& rows) {
        for (const auto& r : rows) csv.append(to_csv_row(r));
      },
      a.quiet ? nullptr : &std::cerr);

  const auto summary = summarize_records(report.records);
  const fs::path out(a.out);
  const fs::path summary_path =
      a.summary.empty() ? out.parent_path() / (out.stem().string() + "_summary.csv") : fs::path(a.summary);
  {
    std::ofstream s(summary_path);
    s << kSummaryHeader << '\n';
    for (const auto& row : summary) s << to_csv_row(row) << '\n';
  }
  std::vector<fs::path> plots;
  if (!a.plot_dir.empty()) plots = write_plot_data(summary, a.plot_dir);

  if (g.json) {
    json j{{"rows", report.records.size()}, {"failures", json::array()}, {"results", a.out},
           {"summary", summary_path.string()}};
    for (const auto& f : report.failures) {
      j["failures"].push_back({{"k", f.cell.k},
                               {"omega", f.cell.omega_size},
                               {"dom", f.cell.dom_size},
                               {"option", std::string(1, f.cell.option_label)},
                               {"replicate", f.replicate},
                               {"message", f.message}});
    }
    for (const auto& p : plots) j["plot_data"].push_back(p.string());
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << report.records.size() << " rows appended to " << a.out << "; summary in " << summary_path.string()
              << '\n';
    for (const auto& p : plots) std::cout << "plot data: " << p.string() << '\n';
  }
  for (const auto& f : report.failures) {
    std::cerr << "cell k=" << f.cell.k << " omega=" << f.cell.omega_size << " dom=" << f.cell.dom_size << " option "
              << f.cell.option_label << " replicate " << f.replicate << ": " << f.message << '\n';
  }
  return report.failures.empty() ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision making with lower previsions: maximality, interval dominance, benchmark generation"};
  app.require_subcommand(1);
  // Global flags are accepted before or after the subcommand name.
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master RNG seed")->capture_default_str();
  app.add_option("--tol-gap", g.tol_gap, "Relative duality-gap tolerance")->capture_default_str();
  app.add_option("--tol-feas", g.tol_feas, "Feasibility tolerance")->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable output");

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "Generate a decision problem with prescribed maximal/ID counts");
  gen->add_option("--omega", ga.omega, "|Ω|")->capture_default_str();
  gen->add_option("--dom", ga.dom, "|dom P|")->capture_default_str();
  gen->add_option("--k", ga.k, "Number of gambles")->capture_default_str();
  gen->add_option("--m", ga.m, "Number of maximal gambles")->capture_default_str();
  gen->add_option("--n", ga.n, "Number of interval-dominant gambles")->capture_default_str();
  gen->add_option("--vertices", ga.vertices, "Extreme pmfs behind the prevision")->capture_default_str();
  gen->add_option("--slack", ga.slack, "Maximum bound slack")->capture_default_str();
  gen->add_flag("--no-shuffle", ga.no_shuffle, "Keep generation order (maximal gambles first)");
  gen->add_option("-o,--out", ga.out, "Output file (stdout if omitted)");

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Find maximal or interval-dominant gambles");
  solve_cmd->add_option("file", sa.file, "Problem JSON")->required()->check(CLI::ExistingFile);
  auto* alg_opt = solve_cmd->add_option("--alg", sa.alg, "Maximality algorithm 1-4")->check(CLI::Range(1, 4));
  solve_cmd->add_flag("--id-first", sa.id_first, "Run interval dominance first");
  solve_cmd->add_flag("--id-only", sa.id_only, "Only compute interval-dominant gambles")->excludes(alg_opt);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run the benchmark grid");
  bench->add_option("--grid", ba.grid, "desk or paper")->check(CLI::IsMember({"desk", "paper"}))->capture_default_str();
  bench->add_option("--k", ba.ks, "Override set sizes");
  bench->add_option("--omega", ba.omegas, "Override outcome-space sizes");
  bench->add_option("--dom", ba.doms, "Override domain sizes");
  bench->add_option("--options", ba.options, "Subset of option labels, e.g. afj");
  bench->add_option("--reps", ba.reps, "Replicates per cell");
  bench->add_option("--jobs", ba.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("-o,--out", ba.out, "Results CSV (appended)")->capture_default_str();
  bench->add_option("--summary", ba.summary, "Summary CSV (default <out>_summary.csv)");
  bench->add_option("--plot-data", ba.plot_dir, "Directory for per-panel TSV files");
  bench->add_flag("-q,--quiet", ba.quiet, "No per-cell progress");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Brute-force verification of a problem file");
  oracle->add_option("file", oa.file, "Problem JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return run_gen(g, ga);
    if (*solve_cmd) return run_solve(g, sa);
    if (*bench) return run_bench_cmd(g, ba);
    if (*oracle) return run_oracle(g, oa);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SureLossError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kVerify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  return kUsage;
}
