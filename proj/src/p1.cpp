#include <string>
#include <vector>

#include "ipm_detail.hpp"
#include "lowprev/lp.hpp"

namespace lowprev {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

void require_size(const LowerPrevision& prevision, const Gamble& h) {
  if (h.size() != prevision.omega_size()) {
    throw DimensionError("gamble has " + std::to_string(h.size()) + " outcomes, prevision has " +
                         std::to_string(prevision.omega_size()));
  }
}

}  // namespace

LinearProgram make_p1(const LowerPrevision& prevision, const Gamble& h) {
  require_size(prevision, h);
  const auto m = static_cast<Index>(prevision.omega_size());
  const auto n = static_cast<Index>(prevision.domain_size());
  const Eigen::MatrixXd G = prevision.centred_gambles();

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>((n + 1) * (m + 1)));
  for (Index i = 0; i < n; ++i) {
    for (Index w = 0; w < m; ++w) {
      if (G(i, w) != 0.0) t.emplace_back(i, w, G(i, w));
    }
    t.emplace_back(i, m + i, -1.0);
  }
  for (Index w = 0; w < m; ++w) t.emplace_back(n, w, 1.0);

  LinearProgram lp;
  lp.eq_matrix.resize(n + 1, m + n);
  lp.eq_matrix.setFromTriplets(t.begin(), t.end());
  lp.eq_rhs = VectorXd::Zero(n + 1);
  lp.eq_rhs[n] = 1.0;
  lp.objective = VectorXd::Zero(m + n);
  lp.objective.head(m) = h.values();
  lp.nonneg_mask.assign(static_cast<std::size_t>(m + n), 1);
  lp.sense = Sense::Minimize;
  return lp;
}

LinearProgram make_d1(const LowerPrevision& prevision, const Gamble& h) {
  require_size(prevision, h);
  const auto m = static_cast<Index>(prevision.omega_size());
  const auto n = static_cast<Index>(prevision.domain_size());
  const Eigen::MatrixXd G = prevision.centred_gambles();

  // Columns: lambda (n), alpha (1), D1b slacks (m).
  std::vector<Eigen::Triplet<double>> t;
  for (Index w = 0; w < m; ++w) {
    for (Index i = 0; i < n; ++i) {
      if (G(i, w) != 0.0) t.emplace_back(w, i, G(i, w));
    }
    t.emplace_back(w, n, 1.0);
    t.emplace_back(w, n + 1 + w, 1.0);
  }

  LinearProgram lp;
  lp.eq_matrix.resize(m, n + 1 + m);
  lp.eq_matrix.setFromTriplets(t.begin(), t.end());
  lp.eq_rhs = h.values();
  lp.objective = VectorXd::Zero(n + 1 + m);
  lp.objective[n] = 1.0;
  lp.nonneg_mask.assign(static_cast<std::size_t>(n + 1 + m), 1);
  lp.nonneg_mask[static_cast<std::size_t>(n)] = 0;
  lp.sense = Sense::Maximize;
  return lp;
}

VectorXd DualPoint::as_vector() const {
  VectorXd y(lambdas.size() + 1);
  y << lambdas, alpha;
  return y;
}

double DualPoint::min_slack(const LowerPrevision& prevision, const Gamble& h) const {
  const VectorXd combo = prevision.domain_size() ? VectorXd(prevision.centred_gambles().transpose() * lambdas)
                                                 : VectorXd::Zero(static_cast<Index>(prevision.omega_size()));
  return (h.values() - combo).minCoeff() - alpha;
}

DualPoint feasible_start_dual(const LowerPrevision& prevision, const Gamble& h, double lambda) {
  require_size(prevision, h);
  if (!(lambda >= 0.0)) throw std::invalid_argument("dual start multiplier must be nonnegative");
  DualPoint dp;
  dp.lambdas = VectorXd::Constant(static_cast<Index>(prevision.domain_size()), lambda);
  dp.alpha = 0.0;
  dp.alpha = dp.min_slack(prevision, h) - 1.0;
  return dp;
}

PrimalStart feasible_start_primal(const LowerPrevision& prevision, const SolverOptions& opts) {
  const auto m = static_cast<Index>(prevision.omega_size());
  const auto n = static_cast<Index>(prevision.domain_size());
  const LinearProgram lp = make_p1(prevision, Gamble::constant(prevision.omega_size(), 0.0));
  const auto ph = detail::phase_one(lp, opts);
  if (ph.verdict == detail::PhaseOneVerdict::Infeasible) {
    throw SureLossError("lower prevision does not avoid sure loss: credal set is empty");
  }
  if (ph.verdict != detail::PhaseOneVerdict::Feasible) {
    throw SolverError("phase one hit the iteration limit while searching the credal set");
  }

  VectorXd p = ph.x.head(m).cwiseMax(0.0);
  p /= p.sum();
  const VectorXd slack = n ? VectorXd(prevision.centred_gambles() * p) : VectorXd();

  PrimalStart out{ProbabilityMassFunction(p), VectorXd(m + n), false, ph.iterations};
  out.point << p, slack;
  out.strictly_interior = p.minCoeff() > kInteriorMargin && (n == 0 || slack.minCoeff() > kInteriorMargin);
  return out;
}

}  // namespace lowprev
