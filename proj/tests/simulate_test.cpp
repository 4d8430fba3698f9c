#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "serorec/growth.hpp"
#include "serorec/rng.hpp"
#include "serorec/scenario.hpp"
#include "serorec/simulate.hpp"
#include "serorec/stats.hpp"

using namespace serorec;

namespace {

const ScenarioConfig& realistic() {
  static ScenarioConfig cfg = scenario_by_name("realistic");
  return cfg;
}

}  // namespace

TEST_CASE("replicate has the configured cohort layout") {
  PanelDataset data = simulate_dataset(realistic(), "AR1", 0);
  CHECK(data.n_in_sample() == 100);
  CHECK(data.n_out_of_sample() == 5);
  CHECK(data.individuals.size() == 105);
  CHECK(data.biomarker_names == std::vector<std::string>{"AR1"});
  data.validate();

  // Out-of-sample offsets appear in configuration order.
  std::vector<double> out_taus;
  for (const auto& ind : data.individuals)
    if (ind.role == Role::OutOfSample) out_taus.push_back(ind.tau);
  CHECK(out_taus == realistic().out_of_sample_taus);
}

TEST_CASE("visit schedules follow the scenario") {
  PanelDataset data = simulate_dataset(realistic(), "AR4_VL", 1);
  for (const auto& ind : data.individuals) {
    if (ind.role == Role::InSample) {
      REQUIRE(ind.n_obs() == 9);
      CHECK(ind.times == realistic().in_sample_schedule);
    } else {
      REQUIRE(ind.n_obs() == 3);
      CHECK(ind.times[0] == 0.0);
      CHECK(ind.times[1] == doctest::Approx(2.0 / 52.0).epsilon(1e-15));
      CHECK(ind.times[2] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    }
    // One response series per biomarker, same length as the schedule.
    REQUIRE(ind.y.size() == 2);
    for (const auto& series : ind.y) CHECK(series.size() == ind.n_obs());
  }
}

TEST_CASE("same seed and replicate reproduce the dataset exactly") {
  PanelDataset a = simulate_dataset(realistic(), "AR4", 2);
  PanelDataset b = simulate_dataset(realistic(), "AR4", 2);
  REQUIRE(a.individuals.size() == b.individuals.size());
  for (std::size_t i = 0; i < a.individuals.size(); ++i) {
    CHECK(a.individuals[i].tau == b.individuals[i].tau);
    CHECK(a.individuals[i].y == b.individuals[i].y);
    CHECK(a.individuals[i].random_effects == b.individuals[i].random_effects);
  }
}

TEST_CASE("different replicates diverge") {
  PanelDataset a = simulate_dataset(realistic(), "AR4", 2);
  PanelDataset c = simulate_dataset(realistic(), "AR4", 3);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.individuals.size() && !any_diff; ++i)
    any_diff = a.individuals[i].y != c.individuals[i].y;
  CHECK(any_diff);
}

TEST_CASE("in-sample offsets are shared across model rows of a replicate") {
  PanelDataset a = simulate_dataset(realistic(), "AR1", 5);
  PanelDataset b = simulate_dataset(realistic(), "VL", 5);
  for (std::size_t i = 0; i < a.individuals.size(); ++i)
    CHECK(a.individuals[i].tau == b.individuals[i].tau);
}

TEST_CASE("zero-variance coefficients are pinned at the mean") {
  // The four-parameter antibody row fixes its asymptote coordinate.
  PanelDataset data = simulate_dataset(realistic(), "AR4", 4);
  const ModelConfig& mc = realistic().model("AR4");
  for (const auto& ind : data.individuals) {
    REQUIRE(ind.random_effects.size() == 3);
    CHECK(ind.random_effects(0) == mc.mean(0));
    CHECK(ind.random_effects(0) == 1.5);
  }
}

TEST_CASE("zero covariance yields the mean trajectory plus noise only") {
  ScenarioConfig cfg = realistic();
  ModelConfig& mc = cfg.models[0];  // AR1, linear
  mc.cov.setZero();
  mc.error_var = {1e-30};
  RngStream stream(99);
  Individual ind = simulate_individual(mc, cfg, Role::InSample, 0.4, 7, stream);
  std::vector<double> b{mc.mean(0), mc.mean(1)};
  for (std::size_t j = 0; j < ind.n_obs(); ++j) {
    double expected = eval_growth(mc.biomarkers[0].spec.kind, b, ind.times[j] + 0.4);
    CHECK(ind.y[0][j] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("in-sample offsets pool to a uniform sample") {
  std::vector<double> taus;
  for (int rep = 0; rep < 100; ++rep) {
    PanelDataset data = simulate_dataset(realistic(), "AR1", rep);
    for (const auto& ind : data.individuals)
      if (ind.role == Role::InSample) taus.push_back(ind.tau);
  }
  REQUIRE(taus.size() == 10000);
  double d = ks_statistic(taus, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks_pvalue(taus.size(), d) > 0.01);
}

TEST_CASE("joint row induces the configured cross-biomarker correlation") {
  // Antibody growth rate (stacked coord 2, variance 0.6) against viral plateau
  // (coord 3, variance 1.0): covariance 0.232, correlation 0.232/sqrt(0.6).
  const ModelConfig& mc = realistic().model("AR4_VL");
  std::vector<double> rate, plateau;
  for (int rep = 0; rep < 100; ++rep) {
    PanelDataset data = simulate_dataset(realistic(), "AR4_VL", rep);
    for (const auto& ind : data.individuals) {
      rate.push_back(ind.random_effects(2));
      plateau.push_back(ind.random_effects(3));
    }
  }
  double mr = mean(rate), mp = mean(plateau);
  double cov = 0.0, vr = 0.0, vp = 0.0;
  for (std::size_t i = 0; i < rate.size(); ++i) {
    cov += (rate[i] - mr) * (plateau[i] - mp);
    vr += (rate[i] - mr) * (rate[i] - mr);
    vp += (plateau[i] - mp) * (plateau[i] - mp);
  }
  double corr = cov / std::sqrt(vr * vp);
  double expected = mc.cov(2, 3) / std::sqrt(mc.cov(2, 2) * mc.cov(3, 3));
  CHECK(expected == doctest::Approx(0.232 / std::sqrt(0.6)).epsilon(1e-12));
  CHECK(std::abs(corr - expected) < 0.05);
}

TEST_CASE("coefficient draws honour mean and covariance moments") {
  const ModelConfig& mc = realistic().model("AR1");
  RngStream rng(2024);
  const int n = 100000;
  std::vector<double> b0(n), b1(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd b = draw_random_effects(mc.mean, mc.cov, rng);
    b0[i] = b(0);
    b1[i] = b(1);
  }
  CHECK(std::abs(mean(b0) - mc.mean(0)) < 0.02);
  CHECK(std::abs(mean(b1) - mc.mean(1)) < 0.02);
  CHECK(std::abs(sample_variance(b0) - mc.cov(0, 0)) < 0.02);
  double cov = 0.0;
  double m0 = mean(b0), m1 = mean(b1);
  for (int i = 0; i < n; ++i) cov += (b0[i] - m0) * (b1[i] - m1);
  cov /= n - 1;
  CHECK(std::abs(cov - mc.cov(0, 1)) < 0.02);
}

TEST_CASE("ids are unique and roles are ordered in-sample first") {
  PanelDataset data = simulate_dataset(realistic(), "VL", 6);
  std::set<int> ids;
  bool seen_out = false;
  for (const auto& ind : data.individuals) {
    CHECK(ids.insert(ind.id).second);
    if (ind.role == Role::OutOfSample) seen_out = true;
    if (seen_out) CHECK(ind.role == Role::OutOfSample);
  }
}
