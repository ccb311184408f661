#include "lowprev/decide.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lowprev {

using Clock = std::chrono::steady_clock;
using Eigen::Index;
using Eigen::VectorXd;

namespace {

void absorb(AlgorithmStats& stats, const SolveTally& tally) {
  stats.total_ipm_iterations += tally.ipm_iterations;
  stats.early_stops_primal += tally.early_stops_primal;
  stats.early_stops_dual += tally.early_stops_dual;
}

void finish(AlgorithmStats& stats, const SolveTally& seed, const SolveTally& comparisons, Clock::time_point t0) {
  stats.wall_time = Clock::now() - t0;
  stats.seed_solves = seed.lp_solves;
  stats.comparison_solves = comparisons.lp_solves;
  stats.lp_solve_count = stats.seed_solves + stats.id_solves + stats.comparison_solves;
  absorb(stats, seed);
  absorb(stats, comparisons);
}

void check_sizes(const NaturalExtension& ne, std::span<const Gamble> gambles) {
  for (const auto& g : gambles) {
    if (g.size() != ne.prevision().omega_size()) throw DimensionError("gamble length differs from |Ω|");
  }
}

bool dominates(const NaturalExtension& ne, const Gamble& g, const Gamble& f, SolveTally& tally) {
  return ne.sign(g - f, &tally) == Sign::Positive;
}

}  // namespace

AlgorithmStats& AlgorithmStats::operator+=(const AlgorithmStats& o) {
  lp_solve_count += o.lp_solve_count;
  seed_solves += o.seed_solves;
  id_solves += o.id_solves;
  comparison_solves += o.comparison_solves;
  total_ipm_iterations += o.total_ipm_iterations;
  early_stops_primal += o.early_stops_primal;
  early_stops_dual += o.early_stops_dual;
  wall_time += o.wall_time;
  p0_block_sizes.insert(p0_block_sizes.end(), o.p0_block_sizes.begin(), o.p0_block_sizes.end());
  return *this;
}

const char* to_string(MaxAlgorithm alg) {
  switch (alg) {
    case MaxAlgorithm::Alg1: return "alg1";
    case MaxAlgorithm::Alg2: return "alg2";
    case MaxAlgorithm::Alg3: return "alg3";
    case MaxAlgorithm::Alg4: return "alg4";
  }
  return "?";
}

std::vector<std::size_t> sort_by_expectation(const ProbabilityMassFunction& p, std::span<const Gamble> gambles,
                                             std::vector<double>* expectations) {
  std::vector<double> e(gambles.size());
  for (std::size_t j = 0; j < gambles.size(); ++j) e[j] = expectation(p, gambles[j]);
  std::vector<std::size_t> order(gambles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });
  if (expectations) *expectations = std::move(e);
  return order;
}

SeedResult eadmissible_seed(const NaturalExtension& ne, std::span<const Gamble> gambles, SolveTally* tally) {
  if (gambles.empty()) throw std::invalid_argument("eadmissible_seed needs at least one gamble");
  check_sizes(ne, gambles);
  const std::size_t m = ne.prevision().omega_size();
  const SolveOutcome out = ne.solve_p1(Gamble::constant(m, 0.0), EarlyStop::None);
  if (tally) tally->record(out);
  if (out.status != SolveStatus::Optimal || !out.primal_point) {
    throw SolverError(std::string("seed solve ended with status ") + to_string(out.status));
  }
  VectorXd p = out.primal_point->head(static_cast<Index>(m)).cwiseMax(0.0);
  p /= p.sum();

  SeedResult seed{0, ProbabilityMassFunction(p), {}, {}};
  seed.order = sort_by_expectation(seed.pmf, gambles, &seed.expectations);
  seed.index = seed.order.back();
  return seed;
}

MaximalResult maximal_alg1(const NaturalExtension& ne, std::span<const Gamble> K) {
  check_sizes(ne, K);
  const auto t0 = Clock::now();
  SolveTally none, cmp;
  MaximalResult res;
  const std::size_t k = K.size();
  for (std::size_t i = 0; i < k; ++i) {
    bool undominated = true;
    for (std::size_t j : res.indices) {
      if (dominates(ne, K[j], K[i], cmp)) {
        undominated = false;
        break;
      }
    }
    for (std::size_t j = i + 1; undominated && j < k; ++j) {
      if (dominates(ne, K[j], K[i], cmp)) undominated = false;
    }
    if (undominated) res.indices.push_back(i);
  }
  finish(res.stats, none, cmp, t0);
  return res;
}

MaximalResult maximal_alg2(const NaturalExtension& ne, std::span<const Gamble> K) {
  check_sizes(ne, K);
  const auto t0 = Clock::now();
  SolveTally seed_tally, cmp;
  if (K.size() == 1) {
    // Nothing to sort or compare; the cached credal point is already a witness.
    MaximalResult res{{0}, {}, EAdmissibleWitness{0, ne.primal_start().pmf}};
    finish(res.stats, seed_tally, cmp, t0);
    return res;
  }
  const SeedResult seed = eadmissible_seed(ne, K, &seed_tally);
  const auto& order = seed.order;
  const std::size_t k = K.size();

  MaximalResult res;
  res.indices.push_back(order[k - 1]);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const Gamble& fi = K[order[i]];
    bool undominated = true;
    for (std::size_t j = k - 1; j > i; --j) {
      if (dominates(ne, K[order[j]], fi, cmp)) {
        undominated = false;
        break;
      }
    }
    if (undominated) res.indices.push_back(order[i]);
  }
  std::sort(res.indices.begin(), res.indices.end());
  res.witness = EAdmissibleWitness{seed.index, seed.pmf};
  finish(res.stats, seed_tally, cmp, t0);
  return res;
}

LinearProgram build_p0prime(std::span<const Gamble> comparison, const Gamble& f, const LowerPrevision& prevision) {
  const auto m = static_cast<Index>(prevision.omega_size());
  const auto n = static_cast<Index>(prevision.domain_size());
  if (static_cast<Index>(f.size()) != m) throw DimensionError("gamble length differs from |Ω|");
  const Eigen::MatrixXd G = prevision.centred_gambles();
  const auto blocks = static_cast<Index>(comparison.size());
  const Index rows_per = n + 2;
  const Index cols_per = m + n + 1;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(blocks * ((n + 2) * m + n + 1)));
  for (Index j = 0; j < blocks; ++j) {
    const auto& fj = comparison[static_cast<std::size_t>(j)];
    if (static_cast<Index>(fj.size()) != m) throw DimensionError("gamble length differs from |Ω|");
    const Index r0 = j * rows_per;
    const Index c0 = j * cols_per;
    for (Index w = 0; w < m; ++w) {
      t.emplace_back(r0, c0 + w, 1.0);
      for (Index i = 0; i < n; ++i) {
        if (G(i, w) != 0.0) t.emplace_back(r0 + 1 + i, c0 + w, G(i, w));
      }
      const double d = f.values()[w] - fj.values()[w];
      if (d != 0.0) t.emplace_back(r0 + 1 + n, c0 + w, d);
    }
    for (Index i = 0; i < n; ++i) t.emplace_back(r0 + 1 + i, c0 + m + i, -1.0);
    t.emplace_back(r0 + 1 + n, c0 + m + n, -1.0);
  }

  LinearProgram lp;
  lp.eq_matrix.resize(blocks * rows_per, blocks * cols_per);
  lp.eq_matrix.setFromTriplets(t.begin(), t.end());
  lp.eq_rhs = VectorXd::Zero(blocks * rows_per);
  for (Index j = 0; j < blocks; ++j) lp.eq_rhs[j * rows_per] = 1.0;
  lp.objective = VectorXd::Zero(blocks * cols_per);
  lp.nonneg_mask.assign(static_cast<std::size_t>(blocks * cols_per), 1);
  lp.sense = Sense::Minimize;
  return lp;
}

bool p0prime_feasible(std::span<const Gamble> comparison, const Gamble& f, const NaturalExtension& ne,
                      SolveTally* tally) {
  // No blocks left: only nonemptiness of the credal set remains, already known.
  if (comparison.empty()) return true;
  const SolveOutcome out = solve(build_p0prime(comparison, f, ne.prevision()), {}, ne.options());
  if (tally) tally->record(out);
  switch (out.status) {
    case SolveStatus::Optimal: return true;
    case SolveStatus::PrimalInfeasible: return false;
    default: throw SolverError(std::string("P0' solve ended with status ") + to_string(out.status));
  }
}

MaximalResult maximal_alg3(const NaturalExtension& ne, std::span<const Gamble> K) {
  check_sizes(ne, K);
  const auto t0 = Clock::now();
  SolveTally none, cmp;
  MaximalResult res;
  for (std::size_t i = 0; i < K.size(); ++i) {
    res.stats.p0_block_sizes.push_back(K.size());
    if (p0prime_feasible(K, K[i], ne, &cmp)) res.indices.push_back(i);
  }
  finish(res.stats, none, cmp, t0);
  return res;
}

MaximalResult maximal_alg4(const NaturalExtension& ne, std::span<const Gamble> K) {
  check_sizes(ne, K);
  const auto t0 = Clock::now();
  SolveTally none, cmp;
  MaximalResult res;
  std::vector<Gamble> G;
  for (std::size_t i = 0; i < K.size(); ++i) {
    G.clear();
    for (std::size_t j : res.indices) G.push_back(K[j]);
    for (std::size_t j = i + 1; j < K.size(); ++j) G.push_back(K[j]);
    res.stats.p0_block_sizes.push_back(G.size());
    if (p0prime_feasible(G, K[i], ne, &cmp)) res.indices.push_back(i);
  }
  std::sort(res.indices.begin(), res.indices.end());
  finish(res.stats, none, cmp, t0);
  return res;
}

MaximalResult find_maximal(const NaturalExtension& ne, std::span<const Gamble> K, MaxAlgorithm alg) {
  switch (alg) {
    case MaxAlgorithm::Alg1: return maximal_alg1(ne, K);
    case MaxAlgorithm::Alg2: return maximal_alg2(ne, K);
    case MaxAlgorithm::Alg3: return maximal_alg3(ne, K);
    case MaxAlgorithm::Alg4: return maximal_alg4(ne, K);
  }
  throw std::invalid_argument("unknown algorithm");
}

IntervalDominanceResult interval_dominant(const NaturalExtension& ne, std::span<const Gamble> K) {
  if (K.empty()) throw std::invalid_argument("interval_dominant needs at least one gamble");
  check_sizes(ne, K);
  const auto t0 = Clock::now();
  SolveTally tally;
  IntervalDominanceResult res;
  res.lower_values.resize(K.size());
  for (std::size_t j = 0; j < K.size(); ++j) res.lower_values[j] = ne.lower(K[j], &tally);
  res.best = static_cast<std::size_t>(
      std::max_element(res.lower_values.begin(), res.lower_values.end()) - res.lower_values.begin());
  const double e_best = res.lower_values[res.best];

  // Ē(f_i) >= e  <=>  E(e - f_i) <= 0, so a sign query with early stopping suffices.
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (i == res.best || ne.sign(Gamble::constant(K[i].size(), e_best) - K[i], &tally) == Sign::NonPositive) {
      res.indices.push_back(i);
    }
  }
  res.stats.wall_time = Clock::now() - t0;
  res.stats.id_solves = tally.lp_solves;
  res.stats.lp_solve_count = tally.lp_solves;
  absorb(res.stats, tally);
  return res;
}

std::pair<OptimalitySets, AlgorithmStats> maximal_with_id_prefilter(const NaturalExtension& ne,
                                                                    std::span<const Gamble> K, MaxAlgorithm alg) {
  const auto t0 = Clock::now();
  IntervalDominanceResult id = interval_dominant(ne, K);
  std::vector<Gamble> survivors;
  survivors.reserve(id.indices.size());
  for (std::size_t i : id.indices) survivors.push_back(K[i]);
  MaximalResult mx = find_maximal(ne, survivors, alg);

  OptimalitySets sets;
  for (std::size_t i : mx.indices) sets.maximal_indices.push_back(id.indices[i]);
  std::sort(sets.maximal_indices.begin(), sets.maximal_indices.end());
  sets.interval_dominant_indices = id.indices;
  if (mx.witness) sets.eadmissible_witness = EAdmissibleWitness{id.indices[mx.witness->index], mx.witness->pmf};

  AlgorithmStats stats = id.stats;
  stats += mx.stats;
  stats.wall_time = Clock::now() - t0;
  return {std::move(sets), std::move(stats)};
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

/// E(h) on a fresh P1 with no warm start.
double oracle_lower(const LowerPrevision& prev, const VectorXd& h, const SolverOptions& o) {
  const auto m = static_cast<Index>(prev.omega_size());
  const auto n = static_cast<Index>(prev.domain_size());
  const Eigen::MatrixXd G = prev.centred_gambles();
  std::vector<Eigen::Triplet<double>> t;
  for (Index w = 0; w < m; ++w) {
    t.emplace_back(0, w, 1.0);
    for (Index i = 0; i < n; ++i) t.emplace_back(1 + i, w, G(i, w));
  }
  for (Index i = 0; i < n; ++i) t.emplace_back(1 + i, m + i, -1.0);
  LinearProgram lp;
  lp.eq_matrix.resize(n + 1, m + n);
  lp.eq_matrix.setFromTriplets(t.begin(), t.end());
  lp.eq_rhs = VectorXd::Zero(n + 1);
  lp.eq_rhs[0] = 1.0;
  lp.objective = VectorXd::Zero(m + n);
  lp.objective.head(m) = h;
  lp.nonneg_mask.assign(static_cast<std::size_t>(m + n), 1);

  const SolveOutcome out = solve(lp, {}, o);
  if (out.status != SolveStatus::Optimal) {
    throw SolverError(std::string("oracle solve ended with status ") + to_string(out.status));
  }
  return 0.5 * (*out.primal_value + *out.dual_value);
}

SolverOptions oracle_solver_options(const OracleOptions& opts) {
  SolverOptions o;
  o.tol_gap = opts.tol_gap;
  o.tol_feas = opts.tol_feas;
  o.max_iters = opts.max_iters;
  o.early_stop = EarlyStop::None;
  return o;
}

double oracle_threshold(const OracleOptions& opts, const VectorXd& h) {
  return opts.sign_threshold * (1.0 + h.cwiseAbs().maxCoeff());
}

void require_asl(const LowerPrevision& prev) {
  if (!avoids_sure_loss(prev)) throw SureLossError("lower prevision does not avoid sure loss");
}

}  // namespace

IndexSet maximal_bruteforce(const DecisionProblem& problem, const OracleOptions& opts) {
  const auto& prev = problem.prevision;
  require_asl(prev);
  const SolverOptions o = oracle_solver_options(opts);
  const bool pointwise = prev.domain_size() == 0 && prev.omega_size() <= 3;
  const auto& K = problem.gambles;

  IndexSet out;
  for (std::size_t i = 0; i < K.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < K.size() && maximal; ++j) {
      if (j == i) continue;
      const VectorXd h = K[j].values() - K[i].values();
      const double thr = oracle_threshold(opts, h);
      const bool positive = oracle_lower(prev, h, o) > thr;
      if (pointwise && positive != (h.minCoeff() > thr)) {
        throw std::logic_error("oracle LP disagrees with pointwise minimum for pair (" + std::to_string(j) + ", " +
                               std::to_string(i) + ")");
      }
      if (positive) maximal = false;
    }
    if (maximal) out.push_back(i);
  }
  return out;
}

IndexSet interval_dominant_bruteforce(const DecisionProblem& problem, const OracleOptions& opts) {
  const auto& prev = problem.prevision;
  require_asl(prev);
  const SolverOptions o = oracle_solver_options(opts);
  const auto& K = problem.gambles;

  std::vector<double> lower(K.size()), upper(K.size());
  for (std::size_t j = 0; j < K.size(); ++j) {
    lower[j] = oracle_lower(prev, K[j].values(), o);
    upper[j] = -oracle_lower(prev, -K[j].values(), o);
  }
  const double best = *std::max_element(lower.begin(), lower.end());
  IndexSet out;
  for (std::size_t i = 0; i < K.size(); ++i) {
    const double thr = opts.sign_threshold * (1.0 + std::max(std::abs(best), K[i].sup_norm()) * 2.0);
    if (upper[i] >= best - thr) out.push_back(i);
  }
  return out;
}

MaximalResult find_maximal(const DecisionProblem& problem, MaxAlgorithm alg, const SolverOptions& opts) {
  const NaturalExtension ne(problem.prevision, opts);
  return find_maximal(ne, problem.gambles, alg);
}

IntervalDominanceResult interval_dominant(const DecisionProblem& problem, const SolverOptions& opts) {
  const NaturalExtension ne(problem.prevision, opts);
  return interval_dominant(ne, problem.gambles);
}

}  // namespace lowprev
