#include "lowprev/core.hpp"

#include <cmath>
#include <string>

#include "lowprev/lp.hpp"

namespace lowprev {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (v.size() == 0) throw DimensionError(std::string(what) + " must have at least one entry");
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " has a non-finite entry");
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Gamble::Gamble(Eigen::VectorXd values) : values_(std::move(values)) { require_finite(values_, "gamble"); }

Gamble::Gamble(std::initializer_list<double> values) : Gamble(std::vector<double>(values)) {}

Gamble::Gamble(const std::vector<double>& values) : Gamble(to_eigen(values)) {}

Gamble Gamble::constant(std::size_t omega_size, double value) {
  return Gamble(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(omega_size), value));
}

std::vector<double> Gamble::to_vector() const { return {values_.data(), values_.data() + values_.size()}; }

Gamble Gamble::operator-() const { return Gamble(Eigen::VectorXd(-values_)); }

Gamble operator+(const Gamble& a, const Gamble& b) {
  require_same_size(a.size(), b.size(), "gamble sum");
  return Gamble(Eigen::VectorXd(a.values_ + b.values_));
}

Gamble operator-(const Gamble& a, const Gamble& b) {
  require_same_size(a.size(), b.size(), "gamble difference");
  return Gamble(Eigen::VectorXd(a.values_ - b.values_));
}

Gamble operator+(const Gamble& a, double c) { return Gamble(Eigen::VectorXd(a.values_.array() + c)); }

Gamble operator-(const Gamble& a, double c) { return Gamble(Eigen::VectorXd(a.values_.array() - c)); }

Gamble operator*(double c, const Gamble& a) { return Gamble(Eigen::VectorXd(c * a.values_)); }

ProbabilityMassFunction::ProbabilityMassFunction(Eigen::VectorXd weights, double tol) : weights_(std::move(weights)) {
  require_finite(weights_, "probability mass function");
  if (weights_.minCoeff() < -tol) throw std::invalid_argument("probability mass function has a negative weight");
  if (std::abs(weights_.sum() - 1.0) > tol) throw std::invalid_argument("probability mass function does not sum to one");
}

ProbabilityMassFunction::ProbabilityMassFunction(std::initializer_list<double> weights)
    : ProbabilityMassFunction(to_eigen(std::vector<double>(weights))) {}

ProbabilityMassFunction ProbabilityMassFunction::uniform(std::size_t omega_size) {
  const auto m = static_cast<Eigen::Index>(omega_size);
  return ProbabilityMassFunction(Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
}

LowerPrevision::LowerPrevision(std::size_t omega_size) : LowerPrevision(omega_size, {}) {}

LowerPrevision::LowerPrevision(std::size_t omega_size, std::vector<Assessment> assessments)
    : omega_size_(omega_size), assessments_(std::move(assessments)) {
  if (omega_size_ == 0) throw DimensionError("outcome space must be nonempty");
  for (const auto& a : assessments_) {
    require_same_size(a.gamble.size(), omega_size_, "assessment gamble");
    if (!std::isfinite(a.lower_bound)) throw std::invalid_argument("assessment bound must be finite");
  }
}

Eigen::MatrixXd LowerPrevision::centred_gambles() const {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(assessments_.size()), static_cast<Eigen::Index>(omega_size_));
  for (std::size_t i = 0; i < assessments_.size(); ++i) {
    g.row(static_cast<Eigen::Index>(i)) = (assessments_[i].gamble.values().array() - assessments_[i].lower_bound).matrix();
  }
  return g;
}

DecisionProblem::DecisionProblem(LowerPrevision prevision_, std::vector<Gamble> gambles_)
    : prevision(std::move(prevision_)), gambles(std::move(gambles_)) {
  if (gambles.empty()) throw std::invalid_argument("decision problem needs at least one gamble");
  for (const auto& f : gambles) require_same_size(f.size(), prevision.omega_size(), "decision gamble");
}

double expectation(const ProbabilityMassFunction& p, const Gamble& f) {
  require_same_size(p.size(), f.size(), "expectation");
  return p.weights().dot(f.values());
}

bool avoids_sure_loss(const LowerPrevision& prevision) {
  const auto outcome = solve(make_p1(prevision, Gamble::constant(prevision.omega_size(), 0.0)));
  if (outcome.status == SolveStatus::IterationLimit) {
    throw SolverError("avoids_sure_loss: phase one hit the iteration limit");
  }
  return outcome.status != SolveStatus::PrimalInfeasible;
}

}  // namespace lowprev
