// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lowprev/decide.hpp"
#include "lowprev/genbench.hpp"
#include "lowprev/harness.hpp"

using namespace lowprev;
using Eigen::VectorXd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

/// Counts every shift-bound observation made by the generator in this process.
struct BoundsLog {
  long calls = 0;
  long violations = 0;
  double worst = 0.0;  // largest lo - mid or mid - hi seen

  BoundsObserver observer() {
    return [this](const ShiftBounds& b, std::size_t, ShiftCase) {
      ++calls;
      const double excess = std::max(b.lo - b.mid, b.mid - b.hi);
      worst = std::max(worst, excess);
      if (excess > kBoundsSlack) ++violations;
    };
  }
};

BoundsLog g_bounds;
long g_generation_errors = 0;

GeneratedSet generate(std::size_t omega, std::size_t dom, std::size_t k, char label, std::uint64_t seed) {
  const auto o = table_option(k, label);
  try {
    return generate_problem({omega, dom, k, o.m, o.n, label, seed}, {}, g_bounds.observer());
  } catch (const InternalConsistencyError&) {
    ++g_generation_errors;
    throw;
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Gamble random_gamble(std::size_t m, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Gamble(VectorXd::NullaryExpr(static_cast<Eigen::Index>(m), [&] { return u(rng); }));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Algorithms 1-4 match the brute force and interval dominance contains it.
Verdict oracle_equivalence() {
  constexpr std::size_t kReps = 100;
  long instances = 0, mismatches = 0, id_misses = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t omega : {4, 16}) {
    for (std::size_t k : {8, 16}) {
      for (char label : {'a', 'f', 'j'}) {
        for (std::size_t rep = 0; rep < kReps; ++rep) {
          const auto seed = derive_seed(derive_seed(101, omega * 1000 + k), static_cast<std::uint64_t>(label) * 1000 + rep);
          const auto g = generate(omega, 16, k, label, seed);
          const NaturalExtension ne(g.problem.prevision);
          const auto truth = maximal_bruteforce(g.problem);
          for (int a = 1; a <= 4; ++a) {
            if (find_maximal(ne, g.problem.gambles, static_cast<MaxAlgorithm>(a)).indices != truth) ++mismatches;
          }
          const auto id = interval_dominant(ne, g.problem.gambles).indices;
          if (!std::includes(id.begin(), id.end(), truth.begin(), truth.end())) ++id_misses;
          ++instances;
        }
      }
    }
  }
  return {mismatches == 0 && id_misses == 0,
          std::to_string(instances) + " instances in 12 configurations, " + std::to_string(mismatches) +
              " maximal-set mismatches, " + std::to_string(id_misses) + " interval dominance misses, " +
              fmt("%.0f s", seconds_since(t0))};
}

// 2. Generated (m, n) equals the brute-force counts for every option at k = 16.
Verdict generator_exactness() {
  long instances = 0, wrong = 0;
  std::string first_wrong;
  for (const auto& o : table_options(16)) {
    for (std::size_t rep = 0; rep < 20; ++rep) {
      const auto g = generate(4, 16, 16, o.label, derive_seed(202, static_cast<std::uint64_t>(o.label) * 100 + rep));
      const auto m = maximal_bruteforce(g.problem).size();
      const auto n = interval_dominant_bruteforce(g.problem).size();
      ++instances;
      if (m != o.m || n != o.n) {
        ++wrong;
        if (first_wrong.empty()) {
          first_wrong = std::string(" (first: option ") + o.label + " gave (" + std::to_string(m) + ", " +
                        std::to_string(n) + "))";
        }
      }
    }
  }
  return {wrong == 0, std::to_string(instances) + " instances over options a-j, " + std::to_string(wrong) +
                          " with wrong counts" + first_wrong};
}

// 3. Exact LP counts on purpose-built instances with k = 16.
Verdict lp_counts() {
  std::vector<std::string> bad;
  auto expect = [&](const char* what, long got, long want) {
    if (got != want) bad.push_back(std::string(what) + "=" + std::to_string(got) + " (want " + std::to_string(want) + ")");
  };

  std::vector<Gamble> first{Gamble::constant(3, 1.0)};
  for (int i = 1; i < 16; ++i) first.push_back(Gamble::constant(3, 0.5 - 0.01 * i));
  const NaturalExtension vac3(LowerPrevision(3));
  expect("unique-first alg1", maximal_alg1(vac3, first).stats.comparison_solves, 30);
  expect("unique-first alg2", maximal_alg2(vac3, first).stats.comparison_solves, 15);
  expect("unique-first id", interval_dominant(vac3, first).stats.lp_solve_count, 31);

  std::vector<Gamble> all;
  for (Eigen::Index i = 0; i < 16; ++i) {
    VectorXd v = VectorXd::Zero(16);
    v[i] = 1.0;
    all.emplace_back(v);
  }
  const NaturalExtension vac16(LowerPrevision(16));
  expect("all-maximal alg1", maximal_alg1(vac16, all).stats.comparison_solves, 240);
  expect("all-maximal alg2", maximal_alg2(vac16, all).stats.comparison_solves, 120);
  expect("all-maximal alg3", maximal_alg3(vac16, all).stats.comparison_solves, 16);
  expect("all-maximal id", interval_dominant(vac16, all).stats.lp_solve_count, 31);

  for (char label : {'a', 'e', 'j'}) {
    const auto g = generate(4, 16, 16, label, derive_seed(303, static_cast<std::uint64_t>(label)));
    const NaturalExtension ne(g.problem.prevision);
    expect("generated id", interval_dominant(ne, g.problem.gambles).stats.lp_solve_count, 31);
  }

  std::string detail = "alg1 30/240, alg2 15/120, alg3 16, interval dominance 31";
  if (!bad.empty()) {
    detail = "mismatched:";
    for (const auto& b : bad) detail += " " + b;
  }
  return {bad.empty(), detail};
}

// 4. lo <= mid <= hi at every shift-bound evaluation made by the generator.
Verdict bounds_ordering() {
  // Some larger instances on top of everything generated by criteria 1-3.
  for (std::size_t rep = 0; rep < 10; ++rep) {
    for (char label : {'c', 'f', 'i'}) generate(16, 16, 64, label, derive_seed(404, rep * 10 + static_cast<std::uint64_t>(label)));
  }
  return {g_bounds.violations == 0 && g_generation_errors == 0 && g_bounds.calls > 0,
          std::to_string(g_bounds.calls) + " evaluations, " + std::to_string(g_bounds.violations) +
              " violations, worst excess " + fmt("%.2e", g_bounds.worst)};
}

// 5. Early-stopped signs agree with tightly converged values.
Verdict sign_soundness() {
  SolverOptions tight;
  tight.tol_gap = 1e-12;
  Rng rng(505);
  long queries = 0, borderline = 0, disagreements = 0;
  for (std::size_t omega : {4, 16, 64}) {
    for (std::size_t dom : {4, 16, 64}) {
      for (int rep = 0; rep < 12; ++rep) {
        const auto prev = generate_lower_prevision(omega, dom, kDefaultNumVertices, rng);
        const NaturalExtension ne(prev);
        const NaturalExtension exact(prev, tight);
        for (int q = 0; q < 10; ++q) {
          const Gamble g = random_gamble(omega, rng);
          Gamble h = g;
          if (q >= 3) {
            // Shift so that E(h) lands on, inside or just outside the threshold.
            const double e = exact.lower(g);
            const double t = ne.threshold(g - e);
            const double offsets[] = {0.0, 0.5 * t, -0.5 * t, 3.0 * t, -3.0 * t, 1e-3, -1e-3};
            h = g - e + offsets[q - 3];
          }
          const double value = exact.lower(h);
          const double thr = ne.threshold(h);
          const Sign s = ne.sign(h);
          ++queries;
          bool ok = true;
          if (std::abs(value) > 2.0 * thr) {
            ok = s == (value > 0.0 ? Sign::Positive : Sign::NonPositive);
          } else if (value <= thr) {
            ++borderline;
            ok = s == Sign::NonPositive;
          }
          if (!ok) ++disagreements;
        }
      }
    }
  }
  return {disagreements == 0 && queries >= 1000,
          std::to_string(queries) + " queries (" + std::to_string(borderline) + " within the threshold), " +
              std::to_string(disagreements) + " disagreements"};
}

// 6. Primal and dual optima coincide.
Verdict duality() {
  Rng rng(606);
  long pairs = 0, bad = 0;
  double worst = 0.0;
  for (std::size_t omega : {2, 4, 16, 64}) {
    for (std::size_t dom : {1, 4, 16, 64}) {
      for (int rep = 0; rep < 32; ++rep) {
        const auto prev = generate_lower_prevision(omega, dom, kDefaultNumVertices, rng);
        const Gamble h = random_gamble(omega, rng);
        const auto p = solve(make_p1(prev, h));
        const auto d = solve(make_d1(prev, h));
        ++pairs;
        if (p.status != SolveStatus::Optimal || d.status != SolveStatus::Optimal) {
          ++bad;
          continue;
        }
        const double err = std::abs(*p.primal_value - *d.primal_value) / (1.0 + std::abs(*p.primal_value));
        worst = std::max(worst, err);
        if (err > 1e-6) ++bad;
      }
    }
  }
  return {bad == 0 && pairs >= 500, std::to_string(pairs) + " pairs, " + std::to_string(bad) +
                                        " failures, worst relative difference " + fmt("%.2e", worst)};
}

// 7. Ordinal timing claims from a desk-scale benchmark.
Verdict timing_order() {
  BenchConfig cfg;
  cfg.ks = {16, 64};
  cfg.omegas = {4};
  cfg.doms = {16};
  cfg.options = "abcdefghij";
  cfg.reps = 10;
  cfg.master_seed = 707;
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_bench(cfg);
  if (!report.failures.empty()) {
    return {false, std::to_string(report.failures.size()) + " cells failed verification: " + report.failures[0].message};
  }

  // Median wall time per (k, option, variant).
  std::map<std::tuple<std::size_t, char, std::string>, std::vector<double>> times;
  for (const auto& r : report.records) {
    const std::string v = r.algorithm + (r.with_id_prefilter ? "+id" : "");
    times[{r.k, r.option_label, v}].push_back(r.wall_time_ms);
  }
  auto median = [&](std::size_t k, char o, const std::string& v) { return summarize(times.at({k, o, v})).median; };

  int ex_a = 0, ex_b = 0, ex_c = 0, ex_d = 0, cells = 0, cells_d = 0;
  std::string notes;
  for (std::size_t k : cfg.ks) {
    for (char o : cfg.options) {
      ++cells;
      const double a1 = median(k, o, "alg1"), a2 = median(k, o, "alg2");
      const double a3 = median(k, o, "alg3"), a4 = median(k, o, "alg4");
      const std::string cell = " k=" + std::to_string(k) + "/" + o;
      if (!(a2 <= a1)) ++ex_a, notes += " a:" + cell;
      if (!(std::max(a1, a2) < std::min(a3, a4))) ++ex_b, notes += " b:" + cell;
      if (!(median(k, o, "alg4+id") <= median(k, o, "alg3+id"))) ++ex_c, notes += " c:" + cell;
      if (o <= 'c') {
        ++cells_d;
        if (!(median(k, o, "alg3+id") < a3)) ++ex_d, notes += " d(alg3):" + cell;
        if (!(median(k, o, "alg4+id") < a4)) ++ex_d, notes += " d(alg4):" + cell;
      }
    }
  }
  const bool pass = ex_a <= 1 && ex_b <= 1 && ex_c <= 1 && ex_d <= 1;
  std::ostringstream os;
  os << cells << " cells, exceptions a=" << ex_a << " b=" << ex_b << " c=" << ex_c << " d=" << ex_d << " (of "
     << 2 * cells_d << ")" << (notes.empty() ? "" : ";" + notes) << ", " << fmt("%.0f s", seconds_since(t0));
  return {pass, os.str()};
}

// 8. With every gamble maximal, alg2 makes exactly half of alg1's comparisons.
Verdict half_comparisons() {
  long instances = 0, bad = 0, total1 = 0, total2 = 0;
  for (std::size_t k : {16, 64}) {
    for (std::size_t rep = 0; rep < 10; ++rep) {
      const auto g = generate(4, 16, k, 'j', derive_seed(808, k * 100 + rep));
      const NaturalExtension ne(g.problem.prevision);
      const long c1 = maximal_alg1(ne, g.problem.gambles).stats.comparison_solves;
      const long c2 = maximal_alg2(ne, g.problem.gambles).stats.comparison_solves;
      total1 += c1;
      total2 += c2;
      ++instances;
      if (2 * c2 != c1 || c1 != static_cast<long>(k * (k - 1))) ++bad;
    }
  }
  return {bad == 0, std::to_string(instances) + " option-j instances, alg1 " + std::to_string(total1) +
                        " comparisons, alg2 " + std::to_string(total2) + ", " + std::to_string(bad) + " off"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"generator exactness", generator_exactness},
      {"LP-count formulas", lp_counts},
      {"shift bound ordering", bounds_ordering},
      {"early-stop soundness", sign_soundness},
      {"duality", duality},
      {"directional timing", timing_order},
      {"half the comparisons", half_comparisons},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
