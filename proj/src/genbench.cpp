#include "lowprev/genbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lowprev {

using Eigen::VectorXd;

void ScenarioSpec::validate() const {
  if (omega_size < 1 || k < 1) throw std::invalid_argument("omega and k must be positive");
  if (m_max < 1) throw std::invalid_argument("m must be at least 1");
  if (m_max > k) throw std::invalid_argument("m exceeds k");
  if (n_id > k) throw std::invalid_argument("n exceeds k");
  if (m_max > n_id) throw std::invalid_argument("m exceeds n");
}

std::array<TableOption, 10> table_options(std::size_t k) {
  std::size_t q1 = 0, q2 = 0;
  switch (k) {
    case 16: q1 = 5, q2 = 11; break;
    case 64: q1 = 21, q2 = 42; break;
    case 256: q1 = 85, q2 = 170; break;
    default:
      // Off-table sizes interpolate the same thirds of k.
      if (k < 1) throw std::invalid_argument("k must be positive");
      q1 = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(k / 3.0)), 1, k);
      q2 = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(2.0 * k / 3.0)), q1, k);
  }
  return {{{'a', 1, 1},
           {'b', 1, q1},
           {'c', 1, q2},
           {'d', 1, k},
           {'e', q1, q1},
           {'f', q1, q2},
           {'g', q1, k},
           {'h', q2, q2},
           {'i', q2, k},
           {'j', k, k}}};
}

TableOption table_option(std::size_t k, char label) {
  for (const auto& o : table_options(k)) {
    if (o.label == label) return o;
  }
  throw std::invalid_argument(std::string("unknown option label '") + label + "'");
}

const char* to_string(ShiftCase c) {
  switch (c) {
    case ShiftCase::MaximalAndID: return "maximal";
    case ShiftCase::IDNotMaximal: return "id-not-maximal";
    case ShiftCase::NotID: return "not-id";
  }
  return "?";
}

namespace {

VectorXd uniform_vector(std::size_t size, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd v(static_cast<Eigen::Index>(size));
  for (auto& x : v) x = u(rng);
  return v;
}

VectorXd dirichlet_ones(std::size_t size, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  VectorXd v(static_cast<Eigen::Index>(size));
  for (auto& x : v) x = e(rng);
  return v / v.sum();
}

}  // namespace

LowerPrevision generate_lower_prevision(std::size_t omega_size, std::size_t dom_size, std::size_t num_vertices,
                                        Rng& rng, double max_slack) {
  if (omega_size < 1 || num_vertices < 1) throw std::invalid_argument("sizes must be positive");
  if (!(max_slack >= 0.0)) throw std::invalid_argument("slack must be nonnegative");

  std::vector<VectorXd> vertices;
  vertices.reserve(num_vertices);
  for (std::size_t v = 0; v < num_vertices; ++v) vertices.push_back(dirichlet_ones(omega_size, rng));

  std::uniform_real_distribution<double> slack(0.0, max_slack);
  std::vector<Assessment> assessments;
  assessments.reserve(dom_size);
  for (std::size_t i = 0; i < dom_size; ++i) {
    VectorXd g = uniform_vector(omega_size, rng);
    double bound = std::numeric_limits<double>::infinity();
    for (const auto& p : vertices) bound = std::min(bound, p.dot(g));
    if (max_slack > 0.0) bound -= slack(rng);
    assessments.push_back({Gamble(std::move(g)), bound});
  }
  return LowerPrevision(omega_size, std::move(assessments));
}

bool strict_pair_condition(const NaturalExtension& ne, const Gamble& hi, const Gamble& hj, double margin) {
  return ne.upper(hi - hj) < ne.upper(hi) - ne.lower(hj) - margin;
}

std::vector<Gamble> generate_gamble_pool(std::size_t k, const NaturalExtension& ne, Rng& rng, int max_attempts,
                                         double margin) {
  const std::size_t m = ne.prevision().omega_size();
  std::vector<Gamble> pool;
  std::vector<double> lower, upper;
  pool.reserve(k);

  for (std::size_t i = 0; i < k; ++i) {
    std::size_t bad_j = 0;
    bool bad_forward = true;
    bool accepted = false;
    for (int attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
      Gamble h(uniform_vector(m, rng));
      const double lo_h = ne.lower(h);
      const double up_h = ne.upper(h);
      accepted = true;
      for (std::size_t j = 0; j < pool.size() && accepted; ++j) {
        if (!(ne.upper(h - pool[j]) < up_h - lower[j] - margin)) {
          accepted = false, bad_j = j, bad_forward = true;
        } else if (!(ne.upper(pool[j] - h) < upper[j] - lo_h - margin)) {
          accepted = false, bad_j = j, bad_forward = false;
        }
      }
      if (accepted) {
        pool.push_back(std::move(h));
        lower.push_back(lo_h);
        upper.push_back(up_h);
      }
    }
    if (!accepted) {
      const std::size_t a = bad_forward ? i : bad_j;
      const std::size_t b = bad_forward ? bad_j : i;
      throw GenerationError("gamble pool: strict inequality fails for pair (" + std::to_string(a) + ", " +
                            std::to_string(b) + ") after " + std::to_string(max_attempts) + " attempts");
    }
  }
  return pool;
}

ShiftBounds shift_bounds(std::span<const std::size_t> maximal, std::span<const Gamble> gambles, const Gamble& h,
                         double max_lower, const NaturalExtension& ne, double slack) {
  if (maximal.empty()) throw InternalConsistencyError("shift bounds need a nonempty maximal set");
  ShiftBounds b;
  b.lo = -std::numeric_limits<double>::infinity();
  b.mid = std::numeric_limits<double>::infinity();
  for (std::size_t f : maximal) {
    const Gamble d = h - gambles[f];
    b.lo = std::max(b.lo, ne.lower(d));
    b.mid = std::min(b.mid, ne.upper(d));
  }
  b.hi = ne.upper(h) - max_lower;
  if (b.lo > b.mid + slack || b.mid > b.hi + slack) {
    throw InternalConsistencyError("shift bounds out of order: lo=" + std::to_string(b.lo) +
                                   " mid=" + std::to_string(b.mid) + " hi=" + std::to_string(b.hi));
  }
  return b;
}

ShiftBounds shift_bounds(std::span<const Gamble> gambles, std::span<const std::size_t> maximal, const Gamble& h,
                         const NaturalExtension& ne, double slack) {
  double max_lower = -std::numeric_limits<double>::infinity();
  for (const auto& f : gambles) max_lower = std::max(max_lower, ne.lower(f));
  return shift_bounds(maximal, gambles, h, max_lower, ne, slack);
}

UnitSampler uniform_sampler(Rng& rng) {
  return [&rng] {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = 0.0;
    while (x == 0.0) x = u(rng);
    return x;
  };
}

double choose_shift(const ShiftBounds& b, ShiftCase c, const UnitSampler& draw, double tol, int max_attempts) {
  switch (c) {
    case ShiftCase::MaximalAndID: {
      const double d = draw();
      return d * b.lo + (1.0 - d) * b.mid;
    }
    case ShiftCase::IDNotMaximal: {
      if (b.hi - b.mid <= tol) {
        throw GenerationError("no shift places the gamble in the interval-dominant but not maximal case (mid = " +
                              std::to_string(b.mid) + ", hi = " + std::to_string(b.hi) + ")");
      }
      for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const double d = draw();
        const double alpha = d * b.mid + (1.0 - d) * b.hi;
        if (alpha > b.mid) return alpha;
      }
      throw GenerationError("could not draw a shift strictly above mid");
    }
    case ShiftCase::NotID: return b.hi + draw();
  }
  throw std::invalid_argument("unknown shift case");
}

GeneratedSet generate_set(const ScenarioSpec& spec, const NaturalExtension& ne, std::span<const Gamble> pool,
                          Rng& rng, const BoundsObserver& observer) {
  spec.validate();
  if (pool.size() < spec.k) throw std::invalid_argument("pool holds fewer than k gambles");
  const UnitSampler draw = uniform_sampler(rng);

  std::vector<Gamble> K{pool[0]};
  IndexSet maximal{0};
  double max_lower = ne.lower(pool[0]);

  for (std::size_t i = 1; i < spec.k; ++i) {
    const ShiftCase c = i < spec.m_max  ? ShiftCase::MaximalAndID
                        : i < spec.n_id ? ShiftCase::IDNotMaximal
                                        : ShiftCase::NotID;
    const Gamble& h = pool[i];
    const ShiftBounds b = shift_bounds(maximal, K, h, max_lower, ne);
    if (observer) observer(b, i, c);
    double alpha = 0.0;
    try {
      alpha = choose_shift(b, c, draw);
    } catch (const GenerationError& e) {
      throw GenerationError("gamble " + std::to_string(i) + ": " + e.what());
    }
    K.push_back(h - alpha);
    if (c == ShiftCase::MaximalAndID) maximal.push_back(i);
    max_lower = std::max(max_lower, ne.lower(K.back()));
  }

  IndexSet id(spec.n_id);
  std::iota(id.begin(), id.end(), std::size_t{0});
  return {DecisionProblem(ne.prevision(), std::move(K)), std::move(maximal), std::move(id)};
}

GeneratedSet generate_problem(const ScenarioSpec& spec, const GenerationOptions& opts, const BoundsObserver& observer) {
  spec.validate();
  Rng rng(spec.seed);
  LowerPrevision prev = generate_lower_prevision(spec.omega_size, spec.dom_size, opts.num_vertices, rng, opts.max_slack);
  SolverOptions so;
  so.tol_gap = opts.tol_gap;
  const NaturalExtension ne(std::move(prev), so);
  const std::vector<Gamble> pool = generate_gamble_pool(spec.k, ne, rng, opts.max_attempts);
  GeneratedSet set = generate_set(spec, ne, pool, rng, observer);
  if (!opts.shuffle) return set;

  // perm[new] = old
  std::vector<std::size_t> perm(spec.k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> where(spec.k);
  std::vector<Gamble> shuffled;
  shuffled.reserve(spec.k);
  for (std::size_t i = 0; i < spec.k; ++i) {
    where[perm[i]] = i;
    shuffled.push_back(set.problem.gambles[perm[i]]);
  }
  auto remap = [&](IndexSet& s) {
    for (auto& x : s) x = where[x];
    std::sort(s.begin(), s.end());
  };
  remap(set.claimed_maximal);
  remap(set.claimed_interval_dominant);
  set.problem.gambles = std::move(shuffled);
  return set;
}

}  // namespace lowprev
