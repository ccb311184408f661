#include <doctest.h>

#include <random>

#include "lowprev/core.hpp"
#include "lowprev/genbench.hpp"
#include "oracle.hpp"

using namespace lowprev;

TEST_CASE("gamble rejects empty and non-finite values") {
  CHECK_THROWS_AS(Gamble(std::vector<double>{}), DimensionError);
  CHECK_THROWS_AS(Gamble({1.0, std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(Gamble({1.0, 1.0 / 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Gamble({1.0, 2.0}) - Gamble({1.0}), DimensionError);
}

TEST_CASE("gamble arithmetic") {
  const Gamble f{1.0, -2.0, 3.0};
  CHECK((f + 1.0) == Gamble{2.0, -1.0, 4.0});
  CHECK((2.0 * f) == Gamble{2.0, -4.0, 6.0});
  CHECK((-f) == Gamble{-1.0, 2.0, -3.0});
  CHECK(f.min() == -2.0);
  CHECK(f.max() == 3.0);
  CHECK(f.sup_norm() == 3.0);
}

TEST_CASE("pmf validation") {
  CHECK_NOTHROW(ProbabilityMassFunction({0.25, 0.75}));
  CHECK_THROWS_AS(ProbabilityMassFunction({0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(ProbabilityMassFunction({1.5, -0.5}), std::invalid_argument);
  // Tiny negative weights within tolerance are accepted.
  CHECK_NOTHROW(ProbabilityMassFunction({1.0 + 5e-10, -5e-10}));
  const auto u = ProbabilityMassFunction::uniform(4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25));
}

TEST_CASE("expectation examples") {
  CHECK(expectation({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(expectation({1.0, 0.0}, {3.0, 7.0}) == doctest::Approx(3.0));
  CHECK(expectation({0.25, 0.75}, {4.0, 0.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(expectation({0.5, 0.5}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("expectation is linear") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(5, [&] { return std::abs(u(rng)); });
    const ProbabilityMassFunction p(w / w.sum());
    const Gamble f(Eigen::VectorXd::NullaryExpr(5, [&] { return u(rng); }));
    const Gamble g(Eigen::VectorXd::NullaryExpr(5, [&] { return u(rng); }));
    const double a = u(rng), b = u(rng);
    const double lhs = expectation(p, a * f + b * g);
    const double rhs = a * expectation(p, f) + b * expectation(p, g);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("lower prevision requires matching gamble lengths") {
  CHECK_THROWS_AS(LowerPrevision(2, {{Gamble{1.0, 0.0, 0.0}, 0.1}}), DimensionError);
  CHECK_THROWS_AS(LowerPrevision(0), std::invalid_argument);
  CHECK_THROWS_AS(DecisionProblem(LowerPrevision(2), {}), std::invalid_argument);
  CHECK_THROWS_AS(DecisionProblem(LowerPrevision(2), {Gamble{1.0}}), DimensionError);
}

TEST_CASE("avoids sure loss examples") {
  CHECK(avoids_sure_loss(LowerPrevision(3)));
  CHECK(avoids_sure_loss(LowerPrevision(2, {{Gamble{1.0, 0.0}, 0.4}})));
  CHECK_FALSE(avoids_sure_loss(LowerPrevision(2, {{Gamble{1.0, 0.0}, 1.2}})));

  const LowerPrevision both(2, {{Gamble{1.0, 0.0}, 0.6}, {Gamble{0.0, 1.0}, 0.6}});
  CHECK_FALSE(oracle::credal_nonempty(both));
  CHECK_FALSE(avoids_sure_loss(both));
}

TEST_CASE("avoids sure loss agrees with vertex enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int disagreements = 0, positives = 0;
  for (int t = 0; t < 150; ++t) {
    const std::size_t m = 2 + t % 3;
    const std::size_t n = 1 + t % 4;
    std::vector<Assessment> as;
    for (std::size_t i = 0; i < n; ++i) {
      Gamble g(Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(m), [&] { return u(rng); }));
      // Bounds around the gamble's mean so both verdicts occur.
      as.push_back({g, g.values().mean() + 0.3 * (u(rng) - 0.3)});
    }
    const LowerPrevision prev(m, as);
    const bool lp = avoids_sure_loss(prev);
    positives += lp;
    if (lp != oracle::credal_nonempty(prev)) ++disagreements;
  }
  CHECK(disagreements == 0);
  CHECK(positives > 10);
  CHECK(positives < 140);
}

TEST_CASE("lowering a bound never breaks avoiding sure loss") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    std::vector<Assessment> as;
    for (int i = 0; i < 3; ++i) {
      Gamble g{u(rng), u(rng), u(rng)};
      as.push_back({g, g.values().mean() + 0.2 * (u(rng) - 0.5)});
    }
    if (!avoids_sure_loss(LowerPrevision(3, as))) continue;
    for (auto& a : as) {
      a.lower_bound -= 0.1 * u(rng);
      CHECK(avoids_sure_loss(LowerPrevision(3, as)));
    }
  }
}

TEST_CASE("lower envelopes of explicit pmfs avoid sure loss") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto prev = generate_lower_prevision(2 + t % 5, 1 + t % 7, 1 + t % 4, rng, t % 2 ? 0.05 : 0.0);
    CHECK(avoids_sure_loss(prev));
  }
}
