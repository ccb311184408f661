#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lowprev/core.hpp"
#include "lowprev/decide.hpp"
#include "lowprev/genbench.hpp"
#include "lowprev/lp.hpp"

namespace lowprev {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Problem files

struct ProblemMeta {
  std::optional<std::size_t> m;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<IndexSet> maximal_indices;
  std::optional<IndexSet> interval_dominant_indices;
};

struct ProblemFile {
  DecisionProblem problem;
  ProblemMeta meta;
};

nlohmann::json problem_to_json(const DecisionProblem& problem, const ProblemMeta& meta = {});
ProblemFile problem_from_json(const nlohmann::json& j);

ProblemFile read_problem(const std::filesystem::path& path);
void write_problem(const std::filesystem::path& path, const DecisionProblem& problem, const ProblemMeta& meta = {});

// ---------------------------------------------------------------------------
// Results

struct RunRecord {
  char option_label = '?';
  std::size_t k = 0;
  std::size_t m_max = 0;
  std::size_t n_id = 0;
  std::size_t omega_size = 0;
  std::size_t dom_size = 0;
  /// alg1..alg4 or id_only.
  std::string algorithm;
  bool with_id_prefilter = false;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  long lp_solve_count = 0;
  long total_ipm_iterations = 0;
  /// Size of the returned set: maximal gambles, or interval-dominant ones for id_only.
  std::size_t maximal_found = 0;
  bool verified = false;
};

inline constexpr const char* kResultsHeader =
    "option,k,m,n,omega,dom_size,algorithm,with_id,replicate,seed,time_ms,lp_count,ipm_iters,maximal_found,verified";

std::string to_csv_row(const RunRecord& r);
RunRecord parse_csv_row(const std::string& line);

/// Appends rows, writing the header first only when the file is new or empty.
class CsvAppender {
 public:
  CsvAppender(const std::filesystem::path& path, std::string header);
  void append(const std::string& row);

 private:
  std::filesystem::path path_;
};

struct SampleSummary {
  std::size_t reps = 0;
  double mean = 0.0;
  double sd = 0.0;
  /// 1.96·sd/√reps; zero when reps < 2.
  double ci_halfwidth = 0.0;
  double median = 0.0;
};

SampleSummary summarize(std::vector<double> samples);

struct GridSummary {
  char option_label = '?';
  std::size_t k = 0;
  std::size_t omega_size = 0;
  std::size_t dom_size = 0;
  std::string variant;
  SampleSummary time_ms;
  double mean_lp_count = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "option,k,omega,dom_size,algorithm,reps,mean_ms,ci_halfwidth,median_ms,mean_lp_count";

std::string to_csv_row(const GridSummary& s);

/// Groups records by (option, k, omega, dom, variant) where the variant is the
/// algorithm name with "+id" appended when prefiltered. Order of first appearance.
std::vector<GridSummary> summarize_records(const std::vector<RunRecord>& records);

std::string variant_name(const RunRecord& r);

// ---------------------------------------------------------------------------
// Benchmark grid

/// Counter-based split: a splitmix64 hash of (master, stream).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct Variant {
  std::optional<MaxAlgorithm> alg;  // empty for id_only
  bool with_id = false;
  std::string name() const;
};

/// alg1..alg4 with and without prefilter, then id_only.
std::vector<Variant> all_variants();

struct BenchConfig {
  std::vector<std::size_t> ks{16, 64};
  std::vector<std::size_t> omegas{4, 16};
  std::vector<std::size_t> doms{16};
  std::string options = "abcdefghij";
  std::size_t reps = 10;
  std::uint64_t master_seed = 1;
  std::vector<Variant> variants = all_variants();
  SolverOptions solver;
  GenerationOptions generation;
  OracleOptions oracle;
  unsigned jobs = 1;

  static BenchConfig desk();
  static BenchConfig paper();
};

struct CellKey {
  std::size_t k = 0;
  std::size_t omega_size = 0;
  std::size_t dom_size = 0;
  char option_label = '?';
};

struct CellFailure {
  CellKey cell;
  std::size_t replicate = 0;
  std::string message;
};

struct BenchReport {
  std::vector<RunRecord> records;
  std::vector<CellFailure> failures;
};

/// Runs every variant on one generated instance; the oracle check comes first and
/// throws VerificationError when the generator's claims or any variant's answer
/// disagree with it.
std::vector<RunRecord> run_instance(const ScenarioSpec& spec, std::size_t replicate, const BenchConfig& cfg);

/// Iterates the grid. Rows of each finished cell go to on_rows (serialised, in cell
/// order); a failing replicate abandons the rest of its cell.
BenchReport run_bench(const BenchConfig& cfg,
                      const std::function<void(const std::vector<RunRecord>&)>& on_rows = {},
                      std::ostream* log = nullptr);

/// One TSV per (k, omega, dom) panel: option, variant, mean_ms, ci_halfwidth.
std::vector<std::filesystem::path> write_plot_data(const std::vector<GridSummary>& summary,
                                                   const std::filesystem::path& dir);

}  // namespace lowprev
