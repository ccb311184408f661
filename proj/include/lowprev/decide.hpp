#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lowprev/core.hpp"
#include "lowprev/lp.hpp"
#include "lowprev/natext.hpp"

namespace lowprev {

using IndexSet = std::vector<std::size_t>;

struct EAdmissibleWitness {
  std::size_t index = 0;
  ProbabilityMassFunction pmf;
};

struct OptimalitySets {
  IndexSet maximal_indices;
  IndexSet interval_dominant_indices;
  std::optional<EAdmissibleWitness> eadmissible_witness;
};

/// Instrumentation for one algorithm run.
///
/// lp_solve_count = seed_solves + id_solves + comparison_solves. The comparison
/// count is what the closed-form LP-count formulas refer to.
struct AlgorithmStats {
  long lp_solve_count = 0;
  long seed_solves = 0;
  long id_solves = 0;
  long comparison_solves = 0;
  long total_ipm_iterations = 0;
  long early_stops_primal = 0;
  long early_stops_dual = 0;
  std::chrono::nanoseconds wall_time{0};
  /// Number of pmf blocks in each P0' solved (Algorithms 3 and 4).
  std::vector<std::size_t> p0_block_sizes;

  double wall_time_ms() const { return std::chrono::duration<double, std::milli>(wall_time).count(); }
  AlgorithmStats& operator+=(const AlgorithmStats& other);
};

struct MaximalResult {
  IndexSet indices;
  AlgorithmStats stats;
  std::optional<EAdmissibleWitness> witness;
};

struct IntervalDominanceResult {
  IndexSet indices;
  AlgorithmStats stats;
  /// e_j = E(f_j) for every gamble and the argmax ℓ.
  std::vector<double> lower_values;
  std::size_t best = 0;
};

struct SeedResult {
  std::size_t index = 0;
  ProbabilityMassFunction pmf;
  /// Gamble indices sorted by ascending expectation under pmf (ties by index).
  std::vector<std::size_t> order;
  std::vector<double> expectations;
};

enum class MaxAlgorithm { Alg1 = 1, Alg2 = 2, Alg3 = 3, Alg4 = 4 };

const char* to_string(MaxAlgorithm alg);

/// Solves P1 with h = 0 for a credal-set point p, then sorts K by E_p. The seed is
/// the last gamble of the order, which is E-admissible and hence maximal.
SeedResult eadmissible_seed(const NaturalExtension& ne, std::span<const Gamble> gambles, SolveTally* tally = nullptr);

/// Ascending stable order of gambles by E_p.
std::vector<std::size_t> sort_by_expectation(const ProbabilityMassFunction& p, std::span<const Gamble> gambles,
                                             std::vector<double>* expectations = nullptr);

MaximalResult maximal_alg1(const NaturalExtension& ne, std::span<const Gamble> gambles);
MaximalResult maximal_alg2(const NaturalExtension& ne, std::span<const Gamble> gambles);
MaximalResult maximal_alg3(const NaturalExtension& ne, std::span<const Gamble> gambles);
MaximalResult maximal_alg4(const NaturalExtension& ne, std::span<const Gamble> gambles);
MaximalResult find_maximal(const NaturalExtension& ne, std::span<const Gamble> gambles, MaxAlgorithm alg);

/// Feasibility program in pmf blocks p_j, one per comparison gamble f_j:
///   Σ_ω p_j(ω) = 1
///   Σ_ω (g_i(ω) - P(g_i)) p_j(ω) - s_ji = 0   for every assessment i
///   Σ_ω (f(ω) - f_j(ω)) p_j(ω) - u_j = 0
/// with p, s, u >= 0 and zero objective. Each block has 2 + n rows and |Ω| + n + 1
/// columns; the slacks turn the inequality rows into equalities.
LinearProgram build_p0prime(std::span<const Gamble> comparison, const Gamble& f, const LowerPrevision& prevision);

/// True iff no f_j in the comparison set strictly dominates f, decided by phase one.
bool p0prime_feasible(std::span<const Gamble> comparison, const Gamble& f, const NaturalExtension& ne,
                      SolveTally* tally = nullptr);

/// Interval dominance: f_i is kept iff Ē(f_i) >= max_j E(f_j), ties within the sign
/// threshold included. Exactly 2k - 1 extension solves.
IntervalDominanceResult interval_dominant(const NaturalExtension& ne, std::span<const Gamble> gambles);

/// Interval dominance first, then the chosen algorithm on the survivors. Indices
/// refer to the full set and the stats are summed over both stages.
std::pair<OptimalitySets, AlgorithmStats> maximal_with_id_prefilter(const NaturalExtension& ne,
                                                                    std::span<const Gamble> gambles,
                                                                    MaxAlgorithm alg);

struct OracleOptions {
  double tol_gap = 1e-11;
  double tol_feas = 1e-9;
  double sign_threshold = 1e-9;
  int max_iters = 400;
};

/// Reference answer from every ordered pair E(f_j - f_i), each solved from scratch
/// (phase one, then phase two) with early stopping off. Shares nothing with the
/// algorithms above except the LP solver. For |Ω| <= 3 and vacuous previsions the
/// LP verdicts are cross-checked against pointwise minima.
IndexSet maximal_bruteforce(const DecisionProblem& problem, const OracleOptions& opts = {});

/// Interval dominance evaluated the same independent way as maximal_bruteforce.
IndexSet interval_dominant_bruteforce(const DecisionProblem& problem, const OracleOptions& opts = {});

/// Convenience wrappers that build the natural extension from the problem.
MaximalResult find_maximal(const DecisionProblem& problem, MaxAlgorithm alg, const SolverOptions& opts = {});
IntervalDominanceResult interval_dominant(const DecisionProblem& problem, const SolverOptions& opts = {});

}  // namespace lowprev
