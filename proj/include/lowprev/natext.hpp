#pragma once

#include "lowprev/core.hpp"
#include "lowprev/lp.hpp"

namespace lowprev {

enum class Sign { Positive, NonPositive };

const char* to_string(Sign sign);

/// Natural extension E and its conjugate Ē of one lower prevision.
///
/// Construction runs phase one once (this is also the sure-loss check) and keeps
/// the resulting credal-set point as the primal start of every later P1 solve; the
/// D1 start is recomputed in closed form per query. Immutable afterwards, so one
/// instance may be shared between threads.
class NaturalExtension {
 public:
  /// Throws SureLossError if the prevision does not avoid sure loss.
  explicit NaturalExtension(LowerPrevision prevision, SolverOptions opts = {});

  const LowerPrevision& prevision() const { return prevision_; }
  const SolverOptions& options() const { return opts_; }
  const PrimalStart& primal_start() const { return start_; }

  /// E(h): optimal value of P1 (midpoint of the final primal and dual bounds).
  double lower(const Gamble& h, SolveTally* tally = nullptr) const;

  /// Ē(h) = -E(-h).
  double upper(const Gamble& h, SolveTally* tally = nullptr) const;

  /// Positive iff E(h) > threshold(h). Early stops on a feasible P1 iterate below
  /// -threshold or a feasible D1 iterate above +threshold; otherwise converges to a
  /// gap below half the threshold and classifies by the dual bound, so values
  /// within the threshold are NonPositive.
  Sign sign(const Gamble& h, SolveTally* tally = nullptr) const;

  /// options().sign_threshold scaled by (1 + ‖h‖∞).
  double threshold(const Gamble& h) const;

  /// P1 for h with both feasible starts supplied. With early stopping enabled the
  /// gap tolerance is tightened to half of options().sign_threshold.
  SolveOutcome solve_p1(const Gamble& h, EarlyStop early_stop) const;

 private:
  LowerPrevision prevision_;
  SolverOptions opts_;
  PrimalStart start_;
};

// One-shot conveniences; each builds a NaturalExtension, so prefer the class when
// querying the same prevision repeatedly.
double lower_extension(const LowerPrevision& prevision, const Gamble& h, const SolverOptions& opts = {});
double upper_extension(const LowerPrevision& prevision, const Gamble& h, const SolverOptions& opts = {});
Sign extension_sign(const LowerPrevision& prevision, const Gamble& h, const SolverOptions& opts = {});

}  // namespace lowprev
