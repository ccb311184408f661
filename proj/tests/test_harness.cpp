#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "lowprev/harness.hpp"

using namespace lowprev;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lowprev_harness_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("problem JSON round trip keeps every bit") {
  const auto gen = generate_problem({4, 16, 16, 5, 11, 'f', 12});
  ProblemMeta meta{5, 11, 12, gen.claimed_maximal, gen.claimed_interval_dominant};
  const auto path = scratch("p.json");
  write_problem(path, gen.problem, meta);
  const auto back = read_problem(path);
  REQUIRE(back.problem.k() == 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(back.problem.gambles[i] == gen.problem.gambles[i]);
  const auto& a = gen.problem.prevision.assessments();
  const auto& b = back.problem.prevision.assessments();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gamble == b[i].gamble);
    CHECK(a[i].lower_bound == b[i].lower_bound);
  }
  CHECK(*back.meta.m == 5);
  CHECK(*back.meta.n == 11);
  CHECK(*back.meta.seed == 12);
  CHECK(*back.meta.maximal_indices == gen.claimed_maximal);
}

TEST_CASE("problem JSON layout") {
  const DecisionProblem p(LowerPrevision(2, {{Gamble{1.0, 0.0}, 0.4}}), {{0.1, 0.2}});
  const auto j = problem_to_json(p);
  CHECK(j["omega"] == 2);
  CHECK(j["lower_prevision"][0]["bound"] == 0.4);
  CHECK(j["lower_prevision"][0]["gamble"].size() == 2);
  CHECK(j["gambles"].size() == 1);
  CHECK(j["meta"]["m"].is_null());
  CHECK(j["meta"]["n"].is_null());
  CHECK(j["meta"]["seed"].is_null());
  const auto back = problem_from_json(j);
  CHECK_FALSE(back.meta.m.has_value());
}

TEST_CASE("malformed problems are rejected") {
  using nlohmann::json;
  const json ok = problem_to_json(DecisionProblem(LowerPrevision(2), {{0.1, 0.2}}));
  json bad = ok;
  bad["gambles"][0] = {0.1};
  CHECK_THROWS_AS(problem_from_json(bad), FormatError);
  bad = ok;
  bad.erase("omega");
  CHECK_THROWS_AS(problem_from_json(bad), FormatError);
  bad = ok;
  bad["gambles"] = json::array();
  CHECK_THROWS_AS(problem_from_json(bad), FormatError);
  bad = ok;
  bad["gambles"][0][0] = "x";
  CHECK_THROWS_AS(problem_from_json(bad), FormatError);
  const auto path = scratch("broken.json");
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(read_problem(path), FormatError);
  CHECK_THROWS_AS(read_problem(scratch("missing.json")), FormatError);
}

TEST_CASE("CSV rows round trip") {
  RunRecord r;
  r.option_label = 'f';
  r.k = 16;
  r.m_max = 5;
  r.n_id = 11;
  r.omega_size = 4;
  r.dom_size = 16;
  r.algorithm = "alg3";
  r.with_id_prefilter = true;
  r.replicate = 7;
  r.seed = 1234567890123ULL;
  r.wall_time_ms = 12.5;
  r.lp_solve_count = 42;
  r.total_ipm_iterations = 99;
  r.maximal_found = 5;
  r.verified = true;
  const auto row = to_csv_row(r);
  CHECK(row == "f,16,5,11,4,16,alg3,1,7,1234567890123,12.5000,42,99,5,1");
  const auto back = parse_csv_row(row);
  CHECK(to_csv_row(back) == row);
  CHECK_THROWS_AS(parse_csv_row("f,16"), FormatError);
  CHECK(std::string(kResultsHeader) ==
        "option,k,m,n,omega,dom_size,algorithm,with_id,replicate,seed,time_ms,lp_count,ipm_iters,maximal_found,verified");
}

TEST_CASE("CSV appends without repeating the header") {
  const auto path = scratch("r.csv");
  {
    CsvAppender a(path, kResultsHeader);
    a.append("row1");
  }
  {
    CsvAppender a(path, kResultsHeader);
    a.append("row2");
  }
  const auto lines = lines_of(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kResultsHeader);
  CHECK(lines[2] == "row2");
}

TEST_CASE("summary statistics") {
  const auto s = summarize({1, 2, 3, 4, 5});
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.sd == doctest::Approx(1.5811).epsilon(1e-4));
  CHECK(s.ci_halfwidth == doctest::Approx(1.386).epsilon(1e-3));
  CHECK(s.median == doctest::Approx(3.0));
  CHECK(summarize({4, 1, 3, 2}).median == doctest::Approx(2.5));
  const auto one = summarize({7});
  CHECK(one.ci_halfwidth == 0.0);
  CHECK(one.reps == 1);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m) {
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(m, s));
  }
  CHECK(seen.size() == 1000);
}

TEST_CASE("variants") {
  const auto v = all_variants();
  REQUIRE(v.size() == 9);
  CHECK(v[0].name() == "alg1");
  CHECK(v[1].name() == "alg1+id");
  CHECK(v[8].name() == "id_only");
}

TEST_CASE("one instance yields nine verified rows") {
  BenchConfig cfg;
  const auto rows = run_instance({4, 16, 16, 1, 1, 'a', 5}, 0, cfg);
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    CHECK(r.verified);
    CHECK(r.wall_time_ms >= 0.0);
    if (r.algorithm == "id_only") {
      CHECK_FALSE(r.with_id_prefilter);
      CHECK(r.lp_solve_count == 31);
    } else {
      CHECK(r.maximal_found == 1);
    }
    if (r.algorithm == "alg1" && r.with_id_prefilter) CHECK(r.lp_solve_count == 31);
  }
}

TEST_CASE("small grid: row count, reproducibility, summaries and plot data") {
  BenchConfig cfg;
  cfg.ks = {16};
  cfg.omegas = {4};
  cfg.doms = {16};
  cfg.options = "aj";
  cfg.reps = 2;
  cfg.master_seed = 9;
  std::size_t streamed = 0;
  const auto report = run_bench(cfg, [&](const std::vector<RunRecord>& rows) { streamed += rows.size(); });
  CHECK(report.failures.empty());
  CHECK(report.records.size() == 2 * 9 * 2);
  CHECK(streamed == report.records.size());

  for (const auto& r : report.records) {
    if (r.option_label == 'j' && r.algorithm == "alg2" && !r.with_id_prefilter) CHECK(r.lp_solve_count == 121);
    if (r.option_label == 'j' && r.algorithm == "alg1" && !r.with_id_prefilter) CHECK(r.lp_solve_count == 240);
  }

  cfg.jobs = 2;
  const auto again = run_bench(cfg);
  REQUIRE(again.records.size() == report.records.size());
  for (std::size_t i = 0; i < again.records.size(); ++i) {
    auto a = report.records[i], b = again.records[i];
    a.wall_time_ms = b.wall_time_ms = 0.0;
    CHECK(to_csv_row(a) == to_csv_row(b));
  }

  const auto summary = summarize_records(report.records);
  CHECK(summary.size() == 2 * 9);
  for (const auto& s : summary) CHECK(s.time_ms.reps == 2);

  const auto dir = scratch("plots");
  const auto files = write_plot_data(summary, dir);
  REQUIRE(files.size() == 1);
  const auto lines = lines_of(files[0]);
  CHECK(lines[0] == "option\talgorithm\tmean_ms\tci_halfwidth");
  CHECK(lines.size() == 1 + 18);
}
