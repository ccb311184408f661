#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include "ipm_detail.hpp"
#include "lowprev/lp.hpp"

namespace lowprev {

using Eigen::Index;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

namespace {

// Dense factorisation is used when free variables are present, for tiny
// systems, and when A A' is at least this full; block-structured programs such
// as P0' go through sparse LDL'.
constexpr Index kTinyRows = 32;
constexpr double kDenseFill = 0.3;
constexpr double kStepFraction = 0.99;
constexpr int kRefineSteps = 8;
// A feasible run within max(kStallSlack * tol_gap, kStallFloor) of the optimum
// that then goes kStallIterations iterations without halving its gap (or loses
// feasibility) has hit the limit of double precision. It, and any run that
// later breaks down, returns the best such iterate as optimal.
constexpr int kStallIterations = 3;
constexpr double kStallSlack = 100.0;
constexpr double kStallFloor = 1e-8;

/// The LP in minimisation form with the variable partition precomputed.
struct MinProblem {
  SpMat A;
  VectorXd b;
  VectorXd c;
  std::vector<Index> nonneg;
  std::vector<Index> free;
  double b_norm = 0.0;
  double c_norm = 0.0;

  MinProblem(const SpMat& A_, VectorXd b_, VectorXd c_, const std::vector<std::uint8_t>& mask)
      : A(A_), b(std::move(b_)), c(std::move(c_)) {
    A.makeCompressed();
    for (Index j = 0; j < A.cols(); ++j) (mask[static_cast<std::size_t>(j)] ? nonneg : free).push_back(j);
    b_norm = b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0;
    c_norm = c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0;
  }

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
};

SpMat select_columns(const SpMat& A, const std::vector<Index>& cols) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (SpMat::InnerIterator it(A, cols[k]); it; ++it) t.emplace_back(it.row(), static_cast<Index>(k), it.value());
  }
  SpMat out(A.rows(), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

/// Solves the reduced Newton system
///   [A_N D A_N'  A_F] [dy ]   [r1]
///   [A_F'        0  ] [dxF] = [r2]
/// with iterative refinement.
class NewtonSystem {
 public:
  explicit NewtonSystem(const MinProblem& P)
      : P_(P), AN_(select_columns(P.A, P.nonneg)), ANt_(AN_.transpose()) {
    dense_ = !P.free.empty() || P.rows() <= kTinyRows || fill(SpMat(AN_ * ANt_)) >= kDenseFill;
    if (dense_) {
      ANd_ = Eigen::MatrixXd(AN_);
      AFd_ = Eigen::MatrixXd(select_columns(P.A, P.free));
    }
  }

  /// d holds x_j / s_j for the nonnegative variables, in P.nonneg order.
  void factor(const VectorXd& d) {
    const Index m = P_.rows();
    if (dense_) {
      M_ = ANd_ * d.asDiagonal() * ANd_.transpose();
      const double reg = regularisation(M_.diagonal());
      if (P_.free.empty()) {
        Eigen::MatrixXd Mreg = M_;
        Mreg.diagonal().array() += reg;
        ldlt_.compute(Mreg);
      } else {
        const Index nf = AFd_.cols();
        K_.setZero(m + nf, m + nf);
        K_.topLeftCorner(m, m) = M_;
        K_.topRightCorner(m, nf) = AFd_;
        K_.bottomLeftCorner(nf, m) = AFd_.transpose();
        Eigen::MatrixXd Kreg = K_;
        Kreg.diagonal().head(m).array() += reg;
        lu_.compute(Kreg);
      }
    } else {
      const SpMat scaled = AN_ * d.asDiagonal();
      Ms_ = scaled * ANt_;
      VectorXd diag = Ms_.diagonal();
      const double reg = regularisation(diag);
      SpMat Mreg = Ms_;
      for (Index i = 0; i < m; ++i) Mreg.coeffRef(i, i) += reg;
      if (!analysed_ || Mreg.nonZeros() != pattern_nnz_) {
        sparse_.analyzePattern(Mreg);
        analysed_ = true;
        pattern_nnz_ = Mreg.nonZeros();
      }
      sparse_.factorize(Mreg);
      if (sparse_.info() != Eigen::Success) throw SolverError("sparse LDL' factorisation failed");
    }
  }

  void solve(const VectorXd& r1, const VectorXd& r2, VectorXd& dy, VectorXd& dxF) const {
    const Index m = P_.rows();
    if (dense_ && !P_.free.empty()) {
      VectorXd rhs(m + r2.size());
      rhs << r1, r2;
      const VectorXd z = refine(rhs, [&](const VectorXd& r) { return VectorXd(lu_.solve(r)); },
                                [&](const VectorXd& v) { return VectorXd(K_ * v); });
      dy = z.head(m);
      dxF = z.tail(r2.size());
      return;
    }
    dxF.resize(0);
    if (dense_) {
      dy = refine(r1, [&](const VectorXd& r) { return VectorXd(ldlt_.solve(r)); },
                  [&](const VectorXd& v) { return VectorXd(M_ * v); });
    } else {
      dy = refine(r1, [&](const VectorXd& r) { return VectorXd(sparse_.solve(r)); },
                  [&](const VectorXd& v) { return VectorXd(Ms_ * v); });
    }
  }

  const SpMat& AN() const { return AN_; }

 private:
  /// Iterative refinement of the regularised factorisation against the exact
  /// matrix; near the optimum the regularisation is far from negligible.
  template <class Solve, class Apply>
  static VectorXd refine(const VectorXd& rhs, Solve&& solve, Apply&& apply) {
    VectorXd z = solve(rhs);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kRefineSteps; ++k) {
      const VectorXd res = rhs - apply(z);
      const double norm = res.lpNorm<Eigen::Infinity>();
      if (!(norm < 0.5 * prev)) break;
      prev = norm;
      z += solve(res);
    }
    return z;
  }

  static double fill(const SpMat& M) {
    const double n = static_cast<double>(M.rows());
    return n > 0 ? static_cast<double>(M.nonZeros()) / (n * n) : 1.0;
  }

  static double regularisation(const VectorXd& diag) {
    const double scale = diag.size() ? diag.cwiseAbs().maxCoeff() : 0.0;
    return 1e-16 * std::max(scale, 1.0);
  }

  const MinProblem& P_;
  SpMat AN_, ANt_;
  bool dense_ = true;
  Eigen::MatrixXd ANd_, AFd_, M_, K_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  SpMat Ms_;
  Eigen::SimplicialLDLT<SpMat> sparse_;
  bool analysed_ = false;
  Index pattern_nnz_ = -1;
};

VectorXd gather(const VectorXd& v, const std::vector<Index>& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = v[idx[k]];
  return out;
}

void scatter(VectorXd& v, const std::vector<Index>& idx, const VectorXd& part) {
  for (std::size_t k = 0; k < idx.size(); ++k) v[idx[k]] = part[static_cast<Index>(k)];
}

double max_step(const VectorXd& v, const VectorXd& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < v.size(); ++j) {
    if (dv[j] < 0.0) a = std::min(a, -v[j] / dv[j]);
  }
  return a;
}

/// How far y is from a Farkas certificate: positive part of A'y - c on the
/// nonnegative columns and |A'y - c| on the free ones.
double farkas_violation(const MinProblem& P, const VectorXd& y) {
  const VectorXd z = P.A.transpose() * y - P.c;
  double v = 0.0;
  for (Index j : P.nonneg) v = std::max(v, z[j]);
  for (Index j : P.free) v = std::max(v, std::abs(z[j]));
  return v;
}

enum class Mode { Standard, PhaseOne };

enum class Exit { Optimal, EarlyNegative, EarlyPositive, Feasible, Infeasible, IterationLimit };

struct IpmState {
  VectorXd x, y, s;  // s is zero on free variables
};

struct IpmRun {
  Exit exit = Exit::IterationLimit;
  int iterations = 0;
  double pobj = 0.0;
  double dobj = 0.0;
};

/// Mehrotra predictor-corrector iterations from the given state.
IpmRun run_ipm(const MinProblem& P, IpmState& st, NewtonSystem& sys, const SolverOptions& o, Mode mode) {
  const auto& nn = P.nonneg;
  const auto& ff = P.free;
  const auto nN = static_cast<double>(nn.size());
  const bool stop_negative = o.early_stop == EarlyStop::StopIfPrimalNegative || o.early_stop == EarlyStop::Both;
  const bool stop_positive = o.early_stop == EarlyStop::StopIfDualPositive || o.early_stop == EarlyStop::Both;

  IpmRun run;
  int stalled = 0;
  // Best feasible iterate within the stall slack, and the stall counter measured
  // against the gap at its last halving.
  IpmState best;
  IpmRun best_run;
  bool have_best = false;
  double ref_gap = std::numeric_limits<double>::infinity();
  int flat = 0;
  auto finish = [&]() {
    if (!have_best) return run.exit = Exit::IterationLimit, run;
    st = best;
    best_run.exit = Exit::Optimal;
    best_run.iterations = run.iterations;
    return best_run;
  };

  for (int iter = 0;; ++iter) {
    const VectorXd rp = P.b - P.A * st.x;
    const VectorXd rd = P.c - P.A.transpose() * st.y - st.s;
    run.pobj = P.c.dot(st.x);
    run.dobj = P.b.dot(st.y);
    run.iterations = iter;
    const bool pfeas = rp.size() == 0 || rp.lpNorm<Eigen::Infinity>() <= o.tol_feas * (1.0 + P.b_norm);
    const bool dfeas = rd.size() == 0 || rd.lpNorm<Eigen::Infinity>() <= o.tol_feas * (1.0 + P.c_norm);

    if (mode == Mode::PhaseOne) {
      if (pfeas && run.pobj <= o.tol_feas) return run.exit = Exit::Feasible, run;
      // Weak duality only certifies infeasibility when the dual residual is
      // negligible next to the dual objective.
      if (dfeas && run.dobj > o.tol_feas && run.dobj > 1e3 * farkas_violation(P, st.y)) {
        return run.exit = Exit::Infeasible, run;
      }
    } else {
      if (stop_negative && pfeas && run.pobj < -o.sign_threshold) return run.exit = Exit::EarlyNegative, run;
      if (stop_positive && dfeas && run.dobj > o.sign_threshold) return run.exit = Exit::EarlyPositive, run;
      const double gap = std::abs(run.pobj - run.dobj);
      if (pfeas && dfeas && gap <= o.tol_gap * (1.0 + std::abs(run.pobj))) return run.exit = Exit::Optimal, run;
      const double window = std::max(kStallSlack * o.tol_gap, kStallFloor) * (1.0 + std::abs(run.pobj));
      if (pfeas && dfeas && gap <= window) {
        if (!have_best || gap < std::abs(best_run.pobj - best_run.dobj)) {
          best = st;
          best_run = run;
          have_best = true;
        }
        if (gap < 0.5 * ref_gap) {
          ref_gap = gap;
          flat = 0;
        } else {
          ++flat;
        }
      } else if (have_best) {
        ++flat;
      }
      if (flat >= kStallIterations) return finish();
    }
    if (!std::isfinite(run.pobj) || !std::isfinite(run.dobj)) return finish();
    if (iter >= o.max_iters || stalled >= 3) return finish();

    const VectorXd xN = gather(st.x, nn);
    const VectorXd sN = gather(st.s, nn);
    const VectorXd rdN = gather(rd, nn);
    const VectorXd rdF = gather(rd, ff);
    const double mu = nn.empty() ? 0.0 : xN.dot(sN) / nN;
    if (!nn.empty() && !(mu > 0.0)) return finish();
    const VectorXd d = xN.cwiseQuotient(sN);
    sys.factor(d);

    // Direction for complementarity target rc = σμe - XSe (- corrector term).
    auto direction = [&](const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& ds) {
      const VectorXd q = rc.cwiseQuotient(sN) - d.cwiseProduct(rdN);
      const VectorXd r1 = rp - sys.AN() * q;
      VectorXd dxF;
      sys.solve(r1, rdF, dy, dxF);
      const VectorXd atdy = sys.AN().transpose() * dy;
      dx = VectorXd::Zero(P.cols());
      ds = VectorXd::Zero(P.cols());
      scatter(dx, nn, VectorXd(q + d.cwiseProduct(atdy)));
      scatter(dx, ff, dxF);
      scatter(ds, nn, VectorXd(rdN - atdy));
    };

    VectorXd dx_aff, dy_aff, ds_aff;
    const VectorXd xs = xN.cwiseProduct(sN);
    direction(-xs, dx_aff, dy_aff, ds_aff);
    const VectorXd dxN_aff = gather(dx_aff, nn);
    const VectorXd dsN_aff = gather(ds_aff, nn);
    const double ap_aff = std::min(1.0, max_step(xN, dxN_aff));
    const double ad_aff = std::min(1.0, max_step(sN, dsN_aff));

    VectorXd dx, dy, ds;
    if (nn.empty()) {
      dx = dx_aff, dy = dy_aff, ds = ds_aff;
    } else {
      const double mu_aff = (xN + ap_aff * dxN_aff).dot(sN + ad_aff * dsN_aff) / nN;
      const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
      const VectorXd rc = (VectorXd::Constant(xN.size(), sigma * mu) - xs - dxN_aff.cwiseProduct(dsN_aff)).eval();
      direction(rc, dx, dy, ds);
    }

    const double ap = std::min(1.0, kStepFraction * max_step(xN, gather(dx, nn)));
    const double ad = std::min(1.0, kStepFraction * max_step(sN, gather(ds, nn)));
    st.x += ap * dx;
    st.y += ad * dy;
    st.s += ad * ds;
    for (Index j : ff) st.s[j] = 0.0;
    stalled = (ap < 1e-12 && ad < 1e-12) ? stalled + 1 : 0;
  }
}

MinProblem to_min_form(const LinearProgram& lp) {
  const VectorXd c = lp.sense == Sense::Maximize ? VectorXd(-lp.objective) : lp.objective;
  return MinProblem(lp.eq_matrix, lp.eq_rhs, c, lp.nonneg_mask);
}

/// Least-squares dual estimate shifted into the interior (Mehrotra's heuristic).
void heuristic_dual(const MinProblem& P, NewtonSystem& sys, const VectorXd& x, VectorXd& y, VectorXd& s) {
  const auto& nn = P.nonneg;
  const VectorXd cN = gather(P.c, nn);
  sys.factor(VectorXd::Ones(static_cast<Index>(nn.size())));
  VectorXd dxF;
  sys.solve(sys.AN() * cN, gather(P.c, P.free), y, dxF);
  s = VectorXd::Zero(P.cols());
  if (nn.empty()) return;
  VectorXd sN = cN - sys.AN().transpose() * y;
  sN.array() += std::max(-1.5 * sN.minCoeff(), 0.0);
  const VectorXd xN = gather(x, nn);
  sN.array() += 0.5 * xN.dot(sN) / std::max(xN.sum(), 1e-300);
  const double floor = 1e-2 * (1.0 + P.c_norm);
  sN = sN.cwiseMax(floor);
  scatter(s, nn, sN);
}

/// Phase one ends on (or very near) the boundary, where the Newton systems are
/// badly conditioned. Raising every nonnegative entry to a floor costs some
/// primal feasibility, which the infeasible-start iterations restore.
void lift_into_interior(const MinProblem& P, VectorXd& x) {
  double scale = 1.0;
  for (Index j : P.nonneg) scale = std::max(scale, x[j]);
  const double floor = 1e-2 * scale;
  for (Index j : P.nonneg) x[j] = std::max(x[j], floor);
}

}  // namespace

namespace detail {

PhaseOneResult phase_one(const LinearProgram& lp, const SolverOptions& opts) {
  const Index m = lp.num_rows();
  const Index n = lp.num_vars();

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(lp.eq_matrix.nonZeros() + 2 * m));
  for (Index j = 0; j < lp.eq_matrix.outerSize(); ++j) {
    for (SpMat::InnerIterator it(lp.eq_matrix, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  }
  for (Index i = 0; i < m; ++i) {
    t.emplace_back(i, n + i, 1.0);
    t.emplace_back(i, n + m + i, -1.0);
  }
  SpMat A1(m, n + 2 * m);
  A1.setFromTriplets(t.begin(), t.end());
  VectorXd c1 = VectorXd::Zero(n + 2 * m);
  c1.tail(2 * m).setOnes();
  std::vector<std::uint8_t> mask(lp.nonneg_mask);
  mask.resize(static_cast<std::size_t>(n + 2 * m), 1);
  MinProblem P(A1, lp.eq_rhs, c1, mask);

  IpmState st;
  st.x = VectorXd::Zero(n + 2 * m);
  st.s = VectorXd::Zero(n + 2 * m);
  for (Index j = 0; j < n; ++j) {
    if (lp.nonneg_mask[static_cast<std::size_t>(j)]) st.x[j] = st.s[j] = 1.0;
  }
  const VectorXd res = lp.eq_rhs - lp.eq_matrix * st.x.head(n);
  st.x.segment(n, m) = res.cwiseMax(0.0).array() + 1.0;
  st.x.tail(m) = (-res).cwiseMax(0.0).array() + 1.0;
  st.s.tail(2 * m).setOnes();
  st.y = VectorXd::Zero(m);

  NewtonSystem sys(P);
  const IpmRun run = run_ipm(P, st, sys, opts, Mode::PhaseOne);
  PhaseOneResult out;
  out.iterations = run.iterations;
  out.x = st.x.head(n);
  out.verdict = run.exit == Exit::Feasible     ? PhaseOneVerdict::Feasible
                : run.exit == Exit::Infeasible ? PhaseOneVerdict::Infeasible
                                               : PhaseOneVerdict::IterationLimit;
  return out;
}

}  // namespace detail

void LinearProgram::validate() const {
  if (objective.size() < 1) throw DimensionError("LP needs at least one variable");
  if (eq_matrix.cols() != objective.size()) throw DimensionError("LP matrix columns do not match objective length");
  if (eq_matrix.rows() != eq_rhs.size()) throw DimensionError("LP matrix rows do not match rhs length");
  if (static_cast<Index>(nonneg_mask.size()) != objective.size()) throw DimensionError("LP sign mask has wrong length");
}

void SolverOptions::validate() const {
  if (!(tol_gap > 0.0) || !(tol_feas > 0.0) || !(sign_threshold > 0.0)) {
    throw std::invalid_argument("solver tolerances must be positive");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::EarlyStopNegative: return "early-stop-negative";
    case SolveStatus::EarlyStopPositive: return "early-stop-positive";
    case SolveStatus::PrimalInfeasible: return "primal-infeasible";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

SolveOutcome solve(const LinearProgram& lp, const StartPoint& start, const SolverOptions& opts) {
  lp.validate();
  opts.validate();
  const MinProblem P = to_min_form(lp);
  const double flip = lp.sense == Sense::Maximize ? -1.0 : 1.0;

  SolveOutcome out;
  IpmState st;
  if (start.primal) {
    if (start.primal->size() != P.cols()) throw DimensionError("primal start has wrong length");
    st.x = *start.primal;
    for (Index j : P.nonneg) {
      if (!(st.x[j] > 0.0)) throw std::invalid_argument("primal start must be strictly positive on nonnegative variables");
    }
  } else {
    const auto ph = detail::phase_one(lp, opts);
    out.iterations += ph.iterations;
    if (ph.verdict != detail::PhaseOneVerdict::Feasible) {
      out.status = ph.verdict == detail::PhaseOneVerdict::Infeasible ? SolveStatus::PrimalInfeasible
                                                                       : SolveStatus::IterationLimit;
      return out;
    }
    st.x = ph.x;
    if (P.c_norm == 0.0) {
      out.status = SolveStatus::Optimal;
      out.primal_value = 0.0;
      out.dual_value = 0.0;
      out.primal_point = st.x;
      out.dual_point = VectorXd::Zero(P.rows());
      return out;
    }
    lift_into_interior(P, st.x);
  }

  NewtonSystem sys(P);
  if (start.dual) {
    if (start.dual->size() != P.rows()) throw DimensionError("dual start has wrong length");
    st.y = flip * *start.dual;
    st.s = P.c - P.A.transpose() * st.y;
    for (Index j : P.nonneg) {
      if (!(st.s[j] > 0.0)) throw std::invalid_argument("dual start must leave strictly positive reduced costs");
    }
    for (Index j : P.free) st.s[j] = 0.0;
  } else {
    heuristic_dual(P, sys, st.x, st.y, st.s);
  }

  const IpmRun run = run_ipm(P, st, sys, opts, Mode::Standard);
  out.iterations += run.iterations;
  switch (run.exit) {
    case Exit::Optimal: out.status = SolveStatus::Optimal; break;
    case Exit::EarlyNegative: out.status = SolveStatus::EarlyStopNegative; break;
    case Exit::EarlyPositive: out.status = SolveStatus::EarlyStopPositive; break;
    default: out.status = SolveStatus::IterationLimit; break;
  }
  out.primal_value = flip * run.pobj;
  out.dual_value = flip * run.dobj;
  out.primal_point = st.x;
  out.dual_point = VectorXd(flip * st.y);
  return out;
}

void SolveTally::record(const SolveOutcome& outcome) {
  lp_solves += outcome.lp_solves_attributed;
  ipm_iterations += outcome.iterations;
  if (outcome.status == SolveStatus::EarlyStopNegative) ++early_stops_primal;
  if (outcome.status == SolveStatus::EarlyStopPositive) ++early_stops_dual;
}

SolveTally& SolveTally::operator+=(const SolveTally& other) {
  lp_solves += other.lp_solves;
  ipm_iterations += other.ipm_iterations;
  early_stops_primal += other.early_stops_primal;
  early_stops_dual += other.early_stops_dual;
  return *this;
}

}  // namespace lowprev
