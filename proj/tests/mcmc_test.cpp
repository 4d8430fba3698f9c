#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "serorec/bayes.hpp"
#include "serorec/diagnostics.hpp"
#include "serorec/errors.hpp"
#include "serorec/mcmc.hpp"
#include "serorec/rng.hpp"
#include "serorec/scenario.hpp"
#include "serorec/simulate.hpp"
#include "serorec/stats.hpp"

using namespace serorec;

namespace {

Individual make_ind(int id, Role role, double tau, std::vector<double> times,
                    std::vector<std::vector<double>> y) {
  Individual ind;
  ind.id = id;
  ind.role = role;
  ind.tau = tau;
  ind.times = std::move(times);
  ind.y = std::move(y);
  return ind;
}

// Three subjects on one exact line y = 2 + 1.2 s, distinct known offsets,
// last subject's offset treated as unknown.
PanelDataset exact_line_data() {
  PanelDataset data;
  data.scenario = "handmade";
  data.model_label = "line";
  data.biomarker_names = {"m"};
  auto on_line = [](double tau, const std::vector<double>& t) {
    std::vector<double> y;
    for (double tj : t) y.push_back(2.0 + 1.2 * (tj + tau));
    return y;
  };
  std::vector<double> t{0.0, 0.5, 1.0, 1.5};
  data.individuals.push_back(make_ind(0, Role::InSample, 0.3, t, {on_line(0.3, t)}));
  data.individuals.push_back(make_ind(1, Role::InSample, 0.7, t, {on_line(0.7, t)}));
  data.individuals.push_back(make_ind(2, Role::OutOfSample, 0.5, t, {on_line(0.5, t)}));
  return data;
}

InferenceModel line_model() {
  return InferenceModel({{"m", GrowthModelSpec::linear()}}, 2, 1.0);
}

// Small simulated cohort with the truth loaded into a chain state.
struct Fixture {
  PanelDataset data;
  InferenceModel model;
  ChainState state;
};

Fixture make_fixture(const std::string& label, int n_in) {
  ScenarioConfig cfg = scenario_by_name("realistic");
  cfg.n_in_sample = n_in;
  cfg.out_of_sample_taus = {0.25};
  PanelDataset data = simulate_dataset(cfg, label, 0);
  const ModelConfig& mc = cfg.model(label);
  InferenceModel model =
      InferenceModel::from_model_config(mc, data.individuals.size() - 1, cfg.sero_interval);
  ChainState st;
  st.mu = mc.mean;
  const auto& rc = model.random_coords();
  st.sigma_beta.resize(rc.size(), rc.size());
  for (std::size_t a = 0; a < rc.size(); ++a)
    for (std::size_t b = 0; b < rc.size(); ++b) st.sigma_beta(a, b) = mc.cov(rc[a], rc[b]);
  st.sigma_eps = mc.error_var;
  st.beta.resize(data.individuals.size(), rc.size());
  for (std::size_t i = 0; i < data.individuals.size(); ++i)
    for (std::size_t a = 0; a < rc.size(); ++a)
      st.beta(i, static_cast<Eigen::Index>(a)) = data.individuals[i].random_effects(rc[a]);
  st.tau_n = 0.5;
  return {std::move(data), std::move(model), std::move(st)};
}

}  // namespace

TEST_CASE("exact linear data initializes at the generating line") {
  PanelDataset data = exact_line_data();
  InferenceModel model = line_model();
  RngStream rng(5);
  ChainState st = init_state(data, model, rng);
  CHECK(st.mu(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(st.mu(1) == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(st.tau_n >= 0.0);
  CHECK(st.tau_n <= 1.0);
}

TEST_CASE("repeated initialization is overdispersed") {
  PanelDataset data = exact_line_data();
  InferenceModel model = line_model();
  RngStream rng(17);
  std::vector<double> taus;
  for (int c = 0; c < 4; ++c) taus.push_back(init_state(data, model, rng).tau_n);
  std::sort(taus.begin(), taus.end());
  CHECK(std::adjacent_find(taus.begin(), taus.end()) == taus.end());
}

TEST_CASE("initial asymptote lies in the observed final-value range") {
  ScenarioConfig cfg = scenario_by_name("realistic");
  cfg.n_in_sample = 25;
  cfg.out_of_sample_taus = {0.25};
  PanelDataset data = simulate_dataset(cfg, "AR4", 0);
  InferenceModel model = InferenceModel::from_model_config(
      cfg.model("AR4"), data.individuals.size() - 1, cfg.sero_interval);
  RngStream rng(3);
  ChainState st = init_state(data, model, rng);
  double lo = 1e300, hi = -1e300;
  for (const auto& ind : data.individuals) {
    if (ind.role != Role::InSample) continue;
    lo = std::min(lo, ind.y[0].back());
    hi = std::max(hi, ind.y[0].back());
  }
  CHECK(st.mu(0) >= lo);
  CHECK(st.mu(0) <= hi);
}

TEST_CASE("an in-sample subject with one observation cannot initialize") {
  PanelDataset data = exact_line_data();
  data.individuals[0].times = {0.0};
  data.individuals[0].y = {{2.0}};
  RngStream rng(1);
  CHECK_THROWS_AS((void)init_state(data, line_model(), rng), InsufficientData);
}

TEST_CASE("the analysed subject may have a single observation") {
  PanelDataset data = exact_line_data();
  data.individuals[2].times = {0.0};
  data.individuals[2].y = {{2.6}};
  RngStream rng(1);
  ChainState st = init_state(data, line_model(), rng);
  CHECK(st.mu.allFinite());
}

TEST_CASE("vanishing proposal steps accept everything and move nothing") {
  Fixture f = make_fixture("AR1", 5);
  SamplerConfig cfg;
  cfg.update.mu = cfg.update.sigma_beta = cfg.update.sigma_eps = false;
  cfg.tau_step0 = 1e-280;
  cfg.beta_step0 = 1e-280;
  cfg.adapt_window = 0;
  cfg.burn_in = 0;
  cfg.iterations = 300;
  cfg.thinning = 1;
  Sampler s(f.data, f.model, cfg, RngStream(42), &f.state);
  for (int i = 0; i < 300; ++i) s.step();
  CHECK(s.tau_acceptance() == 1.0);
  CHECK(s.beta_acceptance() == 1.0);
  CHECK(std::abs(s.state().tau_n - f.state.tau_n) < 1e-200);
  CHECK((s.state().beta - f.state.beta).cwiseAbs().maxCoeff() < 1e-200);
}

TEST_CASE("conjugate-only chain reproduces the closed-form mean posterior") {
  Fixture f = make_fixture("AR1", 8);
  GaussianMoments g =
      full_conditional_mu(f.state.beta, f.state.sigma_beta, f.model.prior().mean_var);
  SamplerConfig cfg;
  cfg.update = {true, false, false, false, false};
  cfg.adapt_window = 0;
  cfg.burn_in = 0;
  cfg.iterations = 5000;
  cfg.thinning = 1;
  Sampler s(f.data, f.model, cfg, RngStream(8), &f.state);
  const int n = 5000;
  std::vector<double> m0, m1;
  for (int i = 0; i < n; ++i) {
    s.step();
    m0.push_back(s.state().mu(0));
    m1.push_back(s.state().mu(1));
  }
  // Draws are i.i.d. from the fixed conditional, so plain 3-sigma bands apply.
  CHECK(std::abs(mean(m0) - g.mean(0)) < 3.0 * std::sqrt(g.cov(0, 0) / n));
  CHECK(std::abs(mean(m1) - g.mean(1)) < 3.0 * std::sqrt(g.cov(1, 1) / n));
  CHECK(sample_variance(m0) == doctest::Approx(g.cov(0, 0)).epsilon(0.15));
}

TEST_CASE("offset marginal matches direct quadrature on one observation") {
  // One analysed subject, a single measurement of a known line: the offset
  // posterior is a truncated Gaussian we can integrate by hand.
  PanelDataset data;
  data.scenario = "handmade";
  data.model_label = "line";
  data.biomarker_names = {"m"};
  data.individuals.push_back(make_ind(0, Role::InSample, 0.3, {0.0, 1.0}, {{2.0, 2.0}}));
  data.individuals.push_back(make_ind(1, Role::OutOfSample, 0.0, {0.0}, {{1.2}}));
  InferenceModel model({{"m", GrowthModelSpec::linear()}}, 1, 1.0);

  ChainState st;
  st.mu = Eigen::VectorXd::Zero(2);
  st.mu << 0.0, 3.0;
  st.sigma_beta = Eigen::MatrixXd::Identity(2, 2);
  st.sigma_eps = {0.09};
  st.beta.resize(2, 2);
  st.beta << 2.0, 0.0, 0.0, 3.0;
  st.tau_n = 0.5;

  SamplerConfig cfg;
  cfg.update = {false, false, false, false, true};
  cfg.adapt_window = 2000;
  cfg.burn_in = 2000;
  cfg.iterations = 200000;
  cfg.thinning = 1;
  Sampler s(data, model, cfg, RngStream(31), &st);

  const int bins = 20;
  std::vector<double> counts(bins, 0.0);
  long kept = 0;
  for (long i = 0; i < cfg.iterations; ++i) {
    s.step();
    if (i < cfg.adapt_window) continue;
    int b = std::min(bins - 1, static_cast<int>(s.state().tau_n * bins));
    counts[static_cast<std::size_t>(b)] += 1.0;
    ++kept;
  }

  auto loglik = [&](double tau) {
    std::vector<double> beta{0.0, 3.0};
    return loglik_individual_univariate(data.individuals[1].y[0], data.individuals[1].times, tau,
                                        beta, 0.09, model.spec(0));
  };
  std::vector<double> mass(bins, 0.0);
  double total = 0.0;
  const int sub = 400;
  for (int b = 0; b < bins; ++b) {
    double lo = static_cast<double>(b) / bins, w = 1.0 / (bins * sub);
    double acc = 0.0;
    for (int j = 0; j < sub; ++j) acc += std::exp(loglik(lo + (j + 0.5) * w)) * w;
    mass[static_cast<std::size_t>(b)] = acc;
    total += acc;
  }
  double tv = 0.0;
  for (int b = 0; b < bins; ++b)
    tv += 0.5 * std::abs(counts[static_cast<std::size_t>(b)] / static_cast<double>(kept) -
                         mass[static_cast<std::size_t>(b)] / total);
  CHECK(tv < 0.02);
}

TEST_CASE("same seed reproduces a run bit for bit") {
  Fixture f = make_fixture("AR1", 6);
  SamplerConfig cfg;
  cfg.n_chains = 2;
  cfg.iterations = 1200;
  cfg.burn_in = 600;
  cfg.adapt_window = 600;
  cfg.thinning = 3;
  cfg.seed = 77;
  ChainOutput a = run_chain(f.data, f.model, cfg);
  ChainOutput b = run_chain(f.data, f.model, cfg);
  REQUIRE(a.chains.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(!a.chains[c].failed);
    CHECK((a.chains[c].draws - b.chains[c].draws).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.chains[c].accept_tau == b.chains[c].accept_tau);
    CHECK(a.chains[c].accept_beta == b.chains[c].accept_beta);
  }
}

TEST_CASE("default configuration retains two thousand draws per chain") {
  SamplerConfig cfg;
  CHECK(cfg.retained_per_chain() == 2000);
}

TEST_CASE("retained draw matrices have the configured shape") {
  Fixture f = make_fixture("AR1", 4);
  SamplerConfig cfg;
  cfg.n_chains = 3;
  cfg.iterations = 900;
  cfg.burn_in = 300;
  cfg.adapt_window = 300;
  cfg.thinning = 4;
  ChainOutput out = run_chain(f.data, f.model, cfg);
  REQUIRE(out.chains.size() == 3);
  for (const auto& c : out.chains) {
    CHECK(c.draws.rows() == 150);
    CHECK(c.draws.cols() == static_cast<Eigen::Index>(out.param_names.size()));
  }
  CHECK(out.n_failed() == 0);
  CHECK(out.pooled(out.tau_column()).size() == 450);
  CHECK(out.per_chain(out.tau_column()).size() == 3);
}

TEST_CASE("metropolis acceptance stays in a healthy band after adaptation") {
  ScenarioConfig cfg = scenario_by_name("realistic");
  cfg.n_in_sample = 20;
  cfg.out_of_sample_taus = {0.25};
  PanelDataset data = simulate_dataset(cfg, "AR1", 1);
  InferenceModel model = InferenceModel::from_model_config(
      cfg.model("AR1"), data.individuals.size() - 1, cfg.sero_interval);
  SamplerConfig sc;
  sc.n_chains = 2;
  sc.iterations = 4000;
  sc.burn_in = 2000;
  sc.adapt_window = 2000;
  sc.thinning = 2;
  ChainOutput out = run_chain(data, model, sc);
  for (const auto& c : out.chains) {
    REQUIRE(!c.failed);
    CHECK(c.accept_tau >= 0.1);
    CHECK(c.accept_tau <= 0.7);
    CHECK(c.accept_beta >= 0.1);
    CHECK(c.accept_beta <= 0.7);
  }
}

TEST_CASE("with no observations the chain reproduces its priors") {
  PanelDataset data;
  data.scenario = "handmade";
  data.model_label = "prior";
  data.biomarker_names = {"m"};
  data.individuals.push_back(make_ind(0, Role::OutOfSample, 0.0, {}, {{}}));
  InferenceModel model({{"m", GrowthModelSpec::linear()}}, 0, 1.0);

  SamplerConfig cfg;
  cfg.n_chains = 1;
  cfg.iterations = 110000;
  cfg.burn_in = 10000;
  cfg.adapt_window = 10000;
  cfg.thinning = 10;
  cfg.seed = 4;
  ChainOutput out = run_chain(data, model, cfg);
  REQUIRE(out.n_failed() == 0);

  std::vector<double> tau = out.pooled(out.tau_column());
  REQUIRE(tau.size() == 10000);
  double d = ks_statistic(tau, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks_pvalue(tau.size(), d) > 0.01);

  std::vector<double> v00 = out.pooled(out.column("sigma_beta.0.0"));
  std::vector<double> v01 = out.pooled(out.column("sigma_beta.0.1"));
  std::vector<double> v11 = out.pooled(out.column("sigma_beta.1.1"));
  std::vector<double> corr(v00.size());
  for (std::size_t i = 0; i < v00.size(); ++i)
    corr[i] = v01[i] / std::sqrt(v00[i] * v11[i]);
  double dc = ks_statistic(corr, [](double x) { return (std::clamp(x, -1.0, 1.0) + 1.0) / 2.0; });
  CHECK(ks_pvalue(corr.size(), dc) > 0.01);
}

TEST_CASE("reflection always lands inside and keeps the kernel symmetric") {
  RngStream rng(12);
  for (int i = 0; i < 2000; ++i) {
    double x = 200.0 * rng.normal();
    double y = reflect_into(x, 0.0, 1.0);
    CHECK(y >= 0.0);
    CHECK(y <= 1.0);
  }
  CHECK(reflect_into(0.4, 0.0, 1.0) == 0.4);
  CHECK(reflect_into(1.2, 0.0, 1.0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(reflect_into(-0.3, 0.0, 1.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(reflect_into(17.3, 0.0, 1.0) == doctest::Approx(0.7).epsilon(1e-12));

  // Transition density of the reflected walk by image summation: symmetric in
  // its two arguments, which justifies the plain Metropolis ratio.
  auto qdens = [](double a, double b, double s) {
    double acc = 0.0;
    for (int k = -60; k <= 60; ++k) {
      for (double img : {b + 2.0 * k, -b + 2.0 * k}) {
        double z = (img - a) / s;
        acc += std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
      }
    }
    return acc;
  };
  for (auto [a, b, s] : {std::tuple{0.15, 0.9, 0.3}, {0.02, 0.5, 0.7}, {0.33, 0.34, 2.5}}) {
    CHECK(qdens(a, b, s) == doctest::Approx(qdens(b, a, s)).epsilon(1e-12));
  }
}

TEST_CASE("parameter names follow the documented order") {
  PanelDataset data = exact_line_data();
  InferenceModel model = line_model();
  std::vector<std::string> names = param_names(data, model);
  std::vector<std::string> expect{"tau_n",          "mu.0",           "mu.1",
                                  "sigma_beta.0.0", "sigma_beta.0.1", "sigma_beta.1.1",
                                  "sigma_eps.0",    "beta.0.0",       "beta.0.1",
                                  "beta.1.0",       "beta.1.1",       "beta.2.0",
                                  "beta.2.1"};
  CHECK(names == expect);
}

TEST_CASE("ideal-scenario fit converges and recovers the generating values") {
  ScenarioConfig cfg = scenario_by_name("ideal");
  PanelDataset full = simulate_dataset(cfg, "AR4", 0);
  // keep the in-sample panel and the tau = 0.25 analysed subject
  PanelDataset data = full;
  data.individuals.clear();
  for (const auto& ind : full.individuals)
    if (ind.role == Role::InSample) data.individuals.push_back(ind);
  for (const auto& ind : full.individuals)
    if (ind.role == Role::OutOfSample && std::abs(ind.tau - 0.25) < 1e-12) {
      data.individuals.push_back(ind);
      break;
    }
  InferenceModel model = InferenceModel::from_model_config(
      cfg.model("AR4"), data.individuals.size() - 1, cfg.sero_interval);

  SamplerConfig sc;
  sc.n_chains = 2;
  sc.iterations = 8000;
  sc.burn_in = 4000;
  sc.adapt_window = 4000;
  sc.thinning = 4;
  sc.seed = 9;
  ChainOutput out = run_chain(data, model, sc);
  REQUIRE(out.n_failed() == 0);

  RhatResult rt = split_rhat(out.per_chain(out.tau_column()));
  CHECK(rt.value < 1.05);
  const Eigen::VectorXd truth = cfg.model("AR4").mean;
  for (int c = 0; c < 3; ++c) {
    std::size_t col = out.column("mu." + std::to_string(c));
    RhatResult rm = split_rhat(out.per_chain(col));
    CHECK(rm.value < 1.05);
    std::vector<double> draws = out.pooled(col);
    double m = mean(draws), sd = std::sqrt(sample_variance(draws));
    CHECK(std::abs(m - truth(c)) < 3.0 * sd);
  }
}

TEST_CASE("decoupled joint fit matches the single-biomarker fit") {
  // Zero cross-covariance and an unobserved analysed subject make the first
  // biomarker's parameters independent of the second's data, so the joint and
  // single fits must agree to Monte-Carlo precision.
  ScenarioConfig cfg = scenario_by_name("realistic");
  cfg.n_in_sample = 12;
  cfg.out_of_sample_taus = {0.25};
  for (auto& m : cfg.models) {
    if (m.label != "AR4_VL") continue;
    for (int a = 1; a <= 2; ++a)
      for (int b = 3; b <= 4; ++b) {
        m.cov(a, b) = 0.0;
        m.cov(b, a) = 0.0;
      }
  }
  cfg.validate();
  PanelDataset joint = simulate_dataset(cfg, "AR4_VL", 2);
  Individual& last = joint.individuals.back();
  last.times.clear();
  last.y = {{}, {}};
  joint.validate();

  PanelDataset single = joint;
  single.biomarker_names = {joint.biomarker_names[0]};
  single.model_label = "AR4";
  for (auto& ind : single.individuals) ind.y.resize(1);
  single.validate();

  const ModelConfig& jm = cfg.model("AR4_VL");
  ModelConfig um;
  um.label = "AR4";
  um.biomarkers = {jm.biomarkers[0]};
  um.mean = jm.mean.head(3);
  um.cov = jm.cov.topLeftCorner(3, 3);
  um.error_var = {jm.error_var[0]};
  um.validate();

  SamplerConfig sc;
  sc.n_chains = 2;
  sc.iterations = 6000;
  sc.burn_in = 3000;
  sc.adapt_window = 3000;
  sc.thinning = 3;
  sc.seed = 21;
  ChainOutput a = run_chain(
      joint, InferenceModel::from_model_config(jm, joint.individuals.size() - 1, 1.0), sc);
  ChainOutput b = run_chain(
      single, InferenceModel::from_model_config(um, single.individuals.size() - 1, 1.0), sc);
  REQUIRE(a.n_failed() == 0);
  REQUIRE(b.n_failed() == 0);

  for (int c = 1; c <= 2; ++c) {
    std::string name = "mu." + std::to_string(c);
    std::vector<double> da = a.pooled(a.column(name));
    std::vector<double> db = b.pooled(b.column(name));
    double se_a = std::sqrt(sample_variance(da) /
                            std::max(1.0, effective_sample_size(da).value));
    double se_b = std::sqrt(sample_variance(db) /
                            std::max(1.0, effective_sample_size(db).value));
    CHECK(std::abs(mean(da) - mean(db)) < 3.0 * std::sqrt(se_a * se_a + se_b * se_b));
  }
}
