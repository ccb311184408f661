#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "lowprev/core.hpp"
#include "lowprev/decide.hpp"
#include "lowprev/natext.hpp"

namespace lowprev {

using Rng = std::mt19937_64;

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shift bounds out of order: the running maximal set is stale or a solve is off.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ScenarioSpec {
  std::size_t omega_size = 4;
  std::size_t dom_size = 16;
  std::size_t k = 16;
  std::size_t m_max = 1;
  std::size_t n_id = 1;
  char option_label = '?';
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless 1 <= m_max <= n_id <= k and sizes are positive.
  void validate() const;
};

struct TableOption {
  char label;
  std::size_t m;
  std::size_t n;
};

/// The ten (m, n) options a..j. Exact table rows for k in {16, 64, 256}; other k use
/// round(k/3) and round(2k/3) in place of the two intermediate sizes.
std::array<TableOption, 10> table_options(std::size_t k);
TableOption table_option(std::size_t k, char label);

struct ShiftBounds {
  double lo = 0.0;
  double mid = 0.0;
  double hi = 0.0;
};

enum class ShiftCase { MaximalAndID, IDNotMaximal, NotID };

const char* to_string(ShiftCase c);

inline constexpr std::size_t kDefaultNumVertices = 16;
inline constexpr double kDefaultMaxSlack = 0.05;
inline constexpr double kStrictMargin = 1e-6;
inline constexpr double kBoundsSlack = 1e-8;

/// Lower envelope of num_vertices Dirichlet(1) pmfs over dom_size uniform [0,1]
/// gambles, each bound lowered by a uniform [0, max_slack] amount. Avoids sure loss
/// by construction.
LowerPrevision generate_lower_prevision(std::size_t omega_size, std::size_t dom_size, std::size_t num_vertices,
                                        Rng& rng, double max_slack = kDefaultMaxSlack);

/// Ē(h_i - h_j) < Ē(h_i) - E(h_j) - margin for the ordered pair (h_i, h_j).
bool strict_pair_condition(const NaturalExtension& ne, const Gamble& hi, const Gamble& hj,
                           double margin = kStrictMargin);

/// k uniform [0,1] gambles with Ē(h_i - h_j) < Ē(h_i) - E(h_j) - margin for every
/// ordered pair. Offending gambles are resampled; after max_attempts draws for one
/// gamble a GenerationError names the last failing pair.
std::vector<Gamble> generate_gamble_pool(std::size_t k, const NaturalExtension& ne, Rng& rng,
                                         int max_attempts = 1000, double margin = kStrictMargin);

/// lo = max over maximal f of E(h - f), mid = min over maximal f of Ē(h - f),
/// hi = Ē(h) - max over K of E(f). Throws InternalConsistencyError when the order
/// lo <= mid <= hi fails by more than slack.
ShiftBounds shift_bounds(std::span<const Gamble> gambles, std::span<const std::size_t> maximal, const Gamble& h,
                         const NaturalExtension& ne, double slack = kBoundsSlack);

/// Same as above with max over K of E(f) already known.
ShiftBounds shift_bounds(std::span<const std::size_t> maximal, std::span<const Gamble> gambles, const Gamble& h,
                         double max_lower, const NaturalExtension& ne, double slack = kBoundsSlack);

/// Draws from the open interval (0, 1); injectable so tests can pin δ and ε.
using UnitSampler = std::function<double()>;

UnitSampler uniform_sampler(Rng& rng);

/// α for the requested case:
///   MaximalAndID  δ·lo + (1-δ)·mid
///   IDNotMaximal  δ·mid + (1-δ)·hi, redrawn until strictly above mid
///   NotID         hi + ε
double choose_shift(const ShiftBounds& bounds, ShiftCase c, const UnitSampler& draw, double tol = 1e-8,
                    int max_attempts = 1000);

struct GeneratedSet {
  DecisionProblem problem;
  IndexSet claimed_maximal;
  IndexSet claimed_interval_dominant;
};

/// Called after every shift_bounds evaluation with the gamble index and its case.
using BoundsObserver = std::function<void(const ShiftBounds&, std::size_t, ShiftCase)>;

/// Shifts pool[0..k) one at a time: the first m_max into MaximalAndID, the next
/// n_id - m_max into IDNotMaximal, the rest into NotID. The running maximal set is
/// updated from the case alone, never recomputed.
GeneratedSet generate_set(const ScenarioSpec& spec, const NaturalExtension& ne, std::span<const Gamble> pool,
                          Rng& rng, const BoundsObserver& observer = {});

struct GenerationOptions {
  std::size_t num_vertices = kDefaultNumVertices;
  double max_slack = kDefaultMaxSlack;
  int max_attempts = 1000;
  /// Randomly permute K afterwards so the maximal gambles are not always first.
  bool shuffle = true;
  /// Natural extension accuracy used while generating.
  double tol_gap = 1e-10;
};

/// Prevision, pool and shifts from one mt19937_64 stream seeded with spec.seed.
GeneratedSet generate_problem(const ScenarioSpec& spec, const GenerationOptions& opts = {},
                              const BoundsObserver& observer = {});

}  // namespace lowprev
