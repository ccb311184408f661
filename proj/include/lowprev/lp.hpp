#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "lowprev/core.hpp"

namespace lowprev {

enum class Sense { Minimize, Maximize };

/// Standard-form LP: optimise c'x subject to Ax = b, x_j >= 0 where nonneg[j], else free.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::SparseMatrix<double> eq_matrix;
  Eigen::VectorXd eq_rhs;
  std::vector<std::uint8_t> nonneg_mask;
  Sense sense = Sense::Minimize;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_rows() const { return eq_rhs.size(); }

  /// Throws DimensionError when the pieces do not fit together.
  void validate() const;
};

enum class EarlyStop { None, StopIfPrimalNegative, StopIfDualPositive, Both };

struct SolverOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-9;
  int max_iters = 200;
  EarlyStop early_stop = EarlyStop::None;
  /// Objective magnitude below which the early-stop rules never fire.
  double sign_threshold = 1e-9;

  void validate() const;
};

enum class SolveStatus { Optimal, EarlyStopNegative, EarlyStopPositive, PrimalInfeasible, IterationLimit };

const char* to_string(SolveStatus status);

/// Result of one solve. Values are reported in the LP's own sense; the early-stop
/// statuses refer to the minimisation form (a maximisation is solved as min -c'x).
struct SolveOutcome {
  SolveStatus status = SolveStatus::IterationLimit;
  std::optional<double> primal_value;
  std::optional<double> dual_value;
  std::optional<Eigen::VectorXd> primal_point;
  std::optional<Eigen::VectorXd> dual_point;
  int iterations = 0;
  int lp_solves_attributed = 1;
};

/// Optional warm start. The primal part must have x_j > 0 on nonnegative variables
/// and the dual part must give strictly positive reduced costs c - A'y there.
struct StartPoint {
  std::optional<Eigen::VectorXd> primal;
  std::optional<Eigen::VectorXd> dual;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mehrotra predictor-corrector primal-dual interior-point method.
///
/// Without a primal start a phase-one problem (one pair of artificials per row) is
/// solved first; it either certifies infeasibility or hands its final iterate to
/// phase two. Supplied feasible starts keep every iterate feasible, which is what
/// allows the early-stop rules to trust the sign of an iterate's objective.
SolveOutcome solve(const LinearProgram& lp, const StartPoint& start = {}, const SolverOptions& opts = {});

/// Running totals over many solves.
struct SolveTally {
  long lp_solves = 0;
  long ipm_iterations = 0;
  long early_stops_primal = 0;
  long early_stops_dual = 0;

  void record(const SolveOutcome& outcome);
  SolveTally& operator+=(const SolveTally& other);
};

// ---------------------------------------------------------------------------
// Natural-extension LP (P1) and its dual (D1)
//
// Variables are x = (p_0..p_{m-1}, t_0..t_{n-1}) with t the P1b slacks; rows are
// the n P1b constraints followed by the simplex row. The dual vector is
// y = (lambda_0..lambda_{n-1}, alpha), i.e. exactly the D1 variables.

LinearProgram make_p1(const LowerPrevision& prevision, const Gamble& h);

/// D1 written as a standard-form maximisation in (lambda >= 0, alpha free, D1b slacks >= 0).
LinearProgram make_d1(const LowerPrevision& prevision, const Gamble& h);

struct DualPoint {
  Eigen::VectorXd lambdas;
  double alpha = 0.0;

  Eigen::VectorXd as_vector() const;
  /// Smallest D1b slack h(ω) - Σ λ_i (g_i(ω) - P(g_i)) - α.
  double min_slack(const LowerPrevision& prevision, const Gamble& h) const;
};

/// Uniform multiplier used by feasible_start_dual. It has to be strictly positive:
/// the reduced cost of slack t_i in P1 is exactly lambda_i.
inline constexpr double kDefaultDualStartLambda = 0.1;

/// Closed-form strictly feasible D1 point: lambda_i = lambda, alpha one below the
/// smallest value of h - Σ λ_i (g_i - P(g_i)). O(n·|Ω|), no LP solve.
DualPoint feasible_start_dual(const LowerPrevision& prevision, const Gamble& h,
                              double lambda = kDefaultDualStartLambda);

inline constexpr double kInteriorMargin = 1e-7;

struct PrimalStart {
  ProbabilityMassFunction pmf;
  /// (p, t) in P1 variable order.
  Eigen::VectorXd point;
  /// Every p(ω) and every P1b slack exceeds kInteriorMargin; only then is the
  /// point usable as an interior-point start. Thinner credal sets fall back to
  /// phase one on every solve.
  bool strictly_interior = false;
  int iterations = 0;
};

/// Phase one of the two-phase method on the P1 constraints. Throws SureLossError when
/// the credal set is empty.
PrimalStart feasible_start_primal(const LowerPrevision& prevision, const SolverOptions& opts = {});

}  // namespace lowprev
