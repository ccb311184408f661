#pragma once

#include <Eigen/Dense>

#include "lowprev/lp.hpp"

namespace lowprev::detail {

enum class PhaseOneVerdict { Feasible, Infeasible, IterationLimit };

struct PhaseOneResult {
  PhaseOneVerdict verdict = PhaseOneVerdict::IterationLimit;
  /// Original variables only; satisfies Ax = b to within the phase-one objective.
  Eigen::VectorXd x;
  int iterations = 0;
};

/// min Σ(a⁺ + a⁻) s.t. Ax + a⁺ - a⁻ = b, started from x = 1 (free parts 0). Stops as
/// soon as a feasible iterate has objective <= tol_feas (feasible) or a dual feasible
/// iterate has objective > tol_feas (infeasibility certified by weak duality).
PhaseOneResult phase_one(const LinearProgram& lp, const SolverOptions& opts);

}  // namespace lowprev::detail
