#ifndef SEROREC_MCMC_HPP
#define SEROREC_MCMC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "serorec/bayes.hpp"
#include "serorec/dataset.hpp"
#include "serorec/rng.hpp"

namespace serorec {

// Per-block toggles; a disabled block leaves its state component fixed for the
// whole run (used by frozen-block oracle tests).
struct UpdateMask {
  bool mu = true;
  bool sigma_beta = true;
  bool sigma_eps = true;
  bool beta = true;
  bool tau = true;
};

struct SamplerConfig {
  int n_chains = 4;
  long iterations = 20000;
  long burn_in = 10000;
  long thinning = 5;
  long adapt_window = 5000;            // adaptation frozen after this many sweeps
  double target_accept_scalar = 0.44;  // tau block
  double target_accept_vector = 0.234; // per-individual coefficient block
  double tau_step0 = 0.1;
  double beta_step0 = 0.2;
  std::uint64_t seed = 1;
  bool parallel_chains = false;
  UpdateMask update;

  long retained_per_chain() const { return (iterations - burn_in) / thinning; }
  void validate() const;
};

// One full Metropolis-within-Gibbs sweep over a chain's state:
//   1. conjugate population-mean draw (normal-normal on the random block, plus
//      a scalar linear-Gaussian draw per fixed-effect coordinate)
//   2. conjugate inverse-Wishart draw of the random-effects covariance
//   3. conjugate inverse-gamma draw of each error variance
//   4. per-individual joint Gaussian random-walk Metropolis on the random
//      coordinates
//   5. reflective Gaussian random-walk Metropolis on the unknown offset
// Step sizes adapt toward the configured acceptance targets during the
// adaptation window and stay frozen afterwards.
class Sampler {
 public:
  Sampler(const PanelDataset& data, const InferenceModel& model, const SamplerConfig& cfg,
          RngStream rng, const ChainState* init = nullptr);
  ~Sampler();
  Sampler(Sampler&&) noexcept;
  Sampler& operator=(Sampler&&) noexcept;

  void step();
  const ChainState& state() const;
  long iteration() const;

  // proposal acceptance rates over post-adaptation sweeps
  double tau_acceptance() const;
  double beta_acceptance() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Fold x into [lo, hi] by reflection at both ends; the resulting random-walk
// proposal kernel is symmetric.
double reflect_into(double x, double lo, double hi);

// Base (un-jittered) initial state: curve heuristics for the population mean,
// identity covariance block, empirical residual variance, coefficients at the
// mean, offset drawn uniformly. In-sample individuals need >= 2 observations.
ChainState init_state(const PanelDataset& data, const InferenceModel& model, RngStream& rng);

struct ChainRun {
  Eigen::MatrixXd draws;  // retained x n_params
  std::uint64_t seed = 0;
  double accept_tau = 0.0;
  double accept_beta = 0.0;
  bool failed = false;
  std::string error;
};

struct ChainOutput {
  std::vector<std::string> param_names;  // column order of every draw matrix
  std::vector<ChainRun> chains;
  SamplerConfig config;
  double wall_seconds = 0.0;

  std::size_t tau_column() const { return 0; }
  std::size_t column(const std::string& name) const;
  // per-chain draws of one column, failed chains skipped
  std::vector<std::vector<double>> per_chain(std::size_t col) const;
  std::vector<double> pooled(std::size_t col) const;
  std::size_t n_failed() const;
};

// Multi-chain driver. Chains are overdispersed by jittering the heuristic mean
// within +/- 2 initial spread and run independently (in parallel when
// configured); a chain failure is recorded and isolated. An explicit init
// state makes every chain start there exactly.
ChainOutput run_chain(const PanelDataset& data, const InferenceModel& model,
                      const SamplerConfig& cfg, const ChainState* init = nullptr);

// Column labels for draw matrices, in the canonical order: tau_n, mu.<c>,
// sigma_beta.<i>.<j> upper triangle row-major, sigma_eps.<k>, then
// beta.<id>.<p> per individual in dataset order.
std::vector<std::string> param_names(const PanelDataset& data, const InferenceModel& model);

}  // namespace serorec

#endif
