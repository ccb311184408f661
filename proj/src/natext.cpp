#include "lowprev/natext.hpp"

#include <algorithm>
#include <string>

namespace lowprev {

const char* to_string(Sign sign) { return sign == Sign::Positive ? "positive" : "non-positive"; }

NaturalExtension::NaturalExtension(LowerPrevision prevision, SolverOptions opts)
    : prevision_(std::move(prevision)), opts_(opts), start_(feasible_start_primal(prevision_, opts_)) {}

double NaturalExtension::threshold(const Gamble& h) const { return opts_.sign_threshold * (1.0 + h.sup_norm()); }

SolveOutcome NaturalExtension::solve_p1(const Gamble& h, EarlyStop early_stop) const {
  SolverOptions o = opts_;
  o.early_stop = early_stop;
  o.sign_threshold = threshold(h);
  // A sign query that does not stop early must still separate E(h) from the
  // threshold, so its gap has to be finer than the threshold itself.
  if (early_stop != EarlyStop::None) o.tol_gap = std::min(o.tol_gap, 0.5 * opts_.sign_threshold);
  StartPoint start;
  if (start_.strictly_interior) start.primal = start_.point;
  start.dual = feasible_start_dual(prevision_, h).as_vector();
  return solve(make_p1(prevision_, h), start, o);
}

double NaturalExtension::lower(const Gamble& h, SolveTally* tally) const {
  const SolveOutcome out = solve_p1(h, EarlyStop::None);
  if (tally) tally->record(out);
  if (out.status != SolveStatus::Optimal) {
    throw SolverError(std::string("natural extension solve ended with status ") + to_string(out.status));
  }
  return 0.5 * (*out.primal_value + *out.dual_value);
}

double NaturalExtension::upper(const Gamble& h, SolveTally* tally) const { return -lower(-h, tally); }

Sign NaturalExtension::sign(const Gamble& h, SolveTally* tally) const {
  const SolveOutcome out = solve_p1(h, EarlyStop::Both);
  if (tally) tally->record(out);
  switch (out.status) {
    case SolveStatus::EarlyStopPositive: return Sign::Positive;
    case SolveStatus::EarlyStopNegative: return Sign::NonPositive;
    case SolveStatus::Optimal:
      // The dual value bounds E(h) from below, so a tie is never called Positive.
      return *out.dual_value > threshold(h) ? Sign::Positive : Sign::NonPositive;
    default:
      throw SolverError(std::string("sign query ended with status ") + to_string(out.status));
  }
}

double lower_extension(const LowerPrevision& prevision, const Gamble& h, const SolverOptions& opts) {
  return NaturalExtension(prevision, opts).lower(h);
}

double upper_extension(const LowerPrevision& prevision, const Gamble& h, const SolverOptions& opts) {
  return NaturalExtension(prevision, opts).upper(h);
}

Sign extension_sign(const LowerPrevision& prevision, const Gamble& h, const SolverOptions& opts) {
  return NaturalExtension(prevision, opts).sign(h);
}

}  // namespace lowprev
