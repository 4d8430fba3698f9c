#include "serorec/growth.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "serorec/rng.hpp"

using namespace serorec;

TEST_CASE("linear trajectory values") {
  CHECK(eval_linear(5.0, 2.0, 0.0) == 5.0);
  CHECK(eval_linear(5.0, 2.0, 1.0) == 7.0);
  CHECK(eval_linear(0.0, 3.0, 0.25) == 0.75);
}

TEST_CASE("saturating trajectory values") {
  CHECK(eval_nonlinear3(0.0, -1.0, 1.0, 0.0) == -1.0);
  // frozen from an independent scalar evaluation: -exp(-e)
  CHECK(eval_nonlinear3(0.0, -1.0, 1.0, 1.0) == doctest::Approx(-0.06598803584531254).epsilon(1e-12));
  CHECK(eval_nonlinear3(0.0, -1.0, 1.0, 1e6) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("viral decay trajectory values") {
  CHECK(eval_viral(3.0, 2.0, 0.0) == 6.0);
  // frozen from an independent scalar evaluation: 3*(1+exp(-2))
  CHECK(eval_viral(3.0, 2.0, 1.0) == doctest::Approx(3.406005849709838).epsilon(1e-12));
  CHECK(eval_viral(3.0, 2.0, 1e4) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("value at zero is twice the plateau") {
  RngStream rng(7);
  for (int i = 0; i < 50; ++i) {
    const double b1 = rng.uniform(-4.0, 4.0);
    const double b2 = rng.uniform(0.1, 5.0);
    CHECK(eval_viral(b1, b2, 0.0) == doctest::Approx(2.0 * b1).epsilon(1e-12));
  }
}

TEST_CASE("rejects non-finite input and negative time") {
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eval_linear(inf, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_nonlinear3(0.0, nan, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_viral(3.0, 2.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(eval_linear(5.0, 2.0, -1e-9), std::invalid_argument);
}

TEST_CASE("dispatch checks the coefficient dimension") {
  const std::vector<double> two{5.0, 2.0};
  CHECK(eval_growth(GrowthKind::Linear, two, 1.0) == 7.0);
  CHECK_THROWS_AS(eval_growth(GrowthKind::Nonlinear3, two, 1.0), std::invalid_argument);
}

TEST_CASE("trajectory evaluation shifts by the offset") {
  const std::vector<double> beta{5.0, 2.0};
  const std::vector<double> times{0.0, 0.25};
  const auto v = eval_trajectory(GrowthModelSpec::linear(), beta, 0.5, times);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(6.5).epsilon(1e-14));

  const std::vector<double> nb{0.0, -1.0, 1.0};
  const std::vector<double> t0{0.0};
  CHECK(eval_trajectory(GrowthModelSpec::nonlinear3(), nb, 0.0, t0)[0] == -1.0);

  const std::vector<double> vb{3.0, 2.0};
  CHECK(eval_trajectory(GrowthModelSpec::viral_decay(), vb, 1.0, t0)[0] ==
        doctest::Approx(3.406005849709838).epsilon(1e-12));
}

TEST_CASE("stacked evaluation concatenates the two series") {
  BivariateSpec joint{GrowthModelSpec::linear(), GrowthModelSpec::viral_decay()};
  const std::vector<double> b1{5.0, 2.0}, b2{3.0, 2.0};
  const std::vector<double> t0{0.0};
  const auto v = eval_bivariate(joint, b1, b2, 0.0, t0);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == 5.0);
  CHECK(v[1] == 6.0);

  CHECK(eval_bivariate(joint, b1, b2, 0.3, {}).empty());
}

TEST_CASE("stacked blocks agree with the univariate evaluators") {
  BivariateSpec joint{GrowthModelSpec::nonlinear3(true), GrowthModelSpec::viral_decay()};
  const std::vector<double> b1{1.5, -1.5, 0.8}, b2{3.0, 2.0};
  const std::vector<double> times{0.0, 0.1, 0.4, 1.1};
  const double tau = 0.5;
  const auto stacked = eval_bivariate(joint, b1, b2, tau, times);
  const auto first = eval_trajectory(joint.first, b1, tau, times);
  const auto second = eval_trajectory(joint.second, b2, tau, times);
  REQUIRE(stacked.size() == 8);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(stacked[j] == doctest::Approx(first[j]).epsilon(1e-12));
    CHECK(stacked[4 + j] == doctest::Approx(second[j]).epsilon(1e-12));
  }
}

TEST_CASE("saturating curve is monotone between intercept and asymptote") {
  RngStream rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const double b1 = rng.uniform(-3.0, 3.0);
    double b2 = rng.uniform(-3.0, 3.0);
    if (b2 == b1) b2 += 0.5;
    const double b3 = rng.uniform(-2.0, 2.0);
    double prev = eval_nonlinear3(b1, b2, b3, 0.0);
    for (int j = 1; j <= 20; ++j) {
      const double cur = eval_nonlinear3(b1, b2, b3, 0.15 * j);
      if (b2 < b1) {
        CHECK(cur > prev);
      } else {
        CHECK(cur < prev);
      }
      prev = cur;
    }
  }
}

TEST_CASE("distance to the asymptote shrinks along the time grid") {
  RngStream rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const double a1 = rng.uniform(-3.0, 3.0);
    const double a2 = rng.uniform(-3.0, 3.0) + 3.5;  // keep b2 != b1
    const double a3 = rng.uniform(-2.0, 2.0);
    const double v1 = rng.uniform(0.5, 4.0);
    const double v2 = rng.uniform(0.2, 4.0);
    double gap_n = std::fabs(eval_nonlinear3(a1, a2, a3, 0.0) - a1);
    double gap_v = std::fabs(eval_viral(v1, v2, 0.0) - v1);
    for (int j = 1; j <= 15; ++j) {
      const double s = 0.3 * j;
      const double gn = std::fabs(eval_nonlinear3(a1, a2, a3, s) - a1);
      const double gv = std::fabs(eval_viral(v1, v2, s) - v1);
      CHECK(gn < gap_n);
      CHECK(gv < gap_v);
      gap_n = gn;
      gap_v = gv;
    }
  }
}

TEST_CASE("shifting the offset equals shifting the time grid") {
  RngStream rng(17);
  const std::vector<GrowthModelSpec> specs{GrowthModelSpec::linear(), GrowthModelSpec::nonlinear3(),
                                           GrowthModelSpec::viral_decay()};
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> beta(static_cast<std::size_t>(spec.dim()));
      for (auto& b : beta) b = rng.uniform(-2.0, 2.0);
      const double tau = rng.uniform(0.0, 1.0);
      std::vector<double> times, shifted;
      for (int j = 0; j < 6; ++j) {
        times.push_back(0.3 * j);
        shifted.push_back(0.3 * j + tau);
      }
      const auto a = eval_trajectory(spec, beta, tau, times);
      const auto b = eval_trajectory(spec, beta, 0.0, shifted);
      for (std::size_t j = 0; j < a.size(); ++j)
        CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("fixed-coordinate masks respect curve structure") {
  CHECK(growth_coord_is_linear(GrowthKind::Linear, 0));
  CHECK(growth_coord_is_linear(GrowthKind::Linear, 1));
  CHECK(growth_coord_is_linear(GrowthKind::Nonlinear3, 0));
  CHECK(growth_coord_is_linear(GrowthKind::Nonlinear3, 1));
  CHECK_FALSE(growth_coord_is_linear(GrowthKind::Nonlinear3, 2));
  CHECK(growth_coord_is_linear(GrowthKind::ViralDecay, 0));
  CHECK_FALSE(growth_coord_is_linear(GrowthKind::ViralDecay, 1));

  const auto fixed_asym = GrowthModelSpec::nonlinear3(true);
  CHECK(fixed_asym.n_fixed() == 1);
  CHECK(fixed_asym.n_random() == 2);
  CHECK(fixed_asym.is_fixed(0));
  CHECK_FALSE(fixed_asym.is_fixed(1));

  GrowthModelSpec bad;
  bad.kind = GrowthKind::Linear;
  bad.fixed_mask = {true, false, false};  // wrong length
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("kind names round-trip") {
  for (auto kind : {GrowthKind::Linear, GrowthKind::Nonlinear3, GrowthKind::ViralDecay})
    CHECK(growth_kind_from_name(growth_kind_name(kind)) == kind);
  CHECK_THROWS_AS(growth_kind_from_name("cubic"), std::invalid_argument);
}
