#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lowprev {

/// Raised when operands have incompatible outcome-space sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a lower prevision incurs sure loss (its credal set is empty).
class SureLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bounded real-valued function on a finite outcome set {0, ..., |Ω|-1}.
class Gamble {
 public:
  Gamble() = default;
  explicit Gamble(Eigen::VectorXd values);
  Gamble(std::initializer_list<double> values);
  explicit Gamble(const std::vector<double>& values);

  static Gamble constant(std::size_t omega_size, double value);

  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }

  std::vector<double> to_vector() const;

  Gamble operator-() const;
  friend Gamble operator+(const Gamble& a, const Gamble& b);
  friend Gamble operator-(const Gamble& a, const Gamble& b);
  friend Gamble operator+(const Gamble& a, double c);
  friend Gamble operator-(const Gamble& a, double c);
  friend Gamble operator*(double c, const Gamble& a);

  friend bool operator==(const Gamble& a, const Gamble& b) { return a.values_ == b.values_; }

 private:
  Eigen::VectorXd values_;
};

/// A probability mass function on the outcome set.
class ProbabilityMassFunction {
 public:
  static constexpr double kDefaultTolerance = 1e-9;

  explicit ProbabilityMassFunction(Eigen::VectorXd weights, double tol = kDefaultTolerance);
  ProbabilityMassFunction(std::initializer_list<double> weights);

  static ProbabilityMassFunction uniform(std::size_t omega_size);

  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }

 private:
  Eigen::VectorXd weights_;
};

struct Assessment {
  Gamble gamble;
  double lower_bound = 0.0;
};

/// Finite list of (gamble, supremum buying price) assessments on an outcome set.
class LowerPrevision {
 public:
  /// Vacuous prevision: empty domain, credal set is the whole simplex.
  explicit LowerPrevision(std::size_t omega_size);
  LowerPrevision(std::size_t omega_size, std::vector<Assessment> assessments);

  std::size_t omega_size() const { return omega_size_; }
  std::size_t domain_size() const { return assessments_.size(); }
  const std::vector<Assessment>& assessments() const { return assessments_; }

  /// Row i holds g_i(ω) - P(g_i); the P1 constraint matrix without the simplex row.
  Eigen::MatrixXd centred_gambles() const;

 private:
  std::size_t omega_size_;
  std::vector<Assessment> assessments_;
};

/// A lower prevision together with the set K of gambles to choose from.
struct DecisionProblem {
  DecisionProblem(LowerPrevision prevision, std::vector<Gamble> gambles);

  LowerPrevision prevision;
  std::vector<Gamble> gambles;

  std::size_t k() const { return gambles.size(); }
};

double expectation(const ProbabilityMassFunction& p, const Gamble& f);

/// True iff the credal set is nonempty, decided by the phase-one feasibility
/// problem over the P1 constraints.
bool avoids_sure_loss(const LowerPrevision& prevision);

}  // namespace lowprev
