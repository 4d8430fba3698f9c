#ifndef SEROREC_RECENCY_HPP
#define SEROREC_RECENCY_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "serorec/mcmc.hpp"

namespace serorec {

// Pr(tau_n <= X): the empirical CDF of the posterior draws at X.
double p_x(const std::vector<double>& tau_draws, double x);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// Shortest window of sorted draws holding ceil(mass*n) of them; >= 20 draws.
Interval hpd_interval(std::vector<double> tau_draws, double mass = 0.95);

struct DensityGrid {
  std::vector<double> x;
  std::vector<double> density;
};

// Gaussian KDE with Silverman bandwidth, mass reflected at both ends of
// [0, support]; grid endpoints inclusive.
DensityGrid posterior_density(const std::vector<double>& tau_draws, std::size_t grid_size,
                              double support);

struct RecencySummary {
  std::vector<std::pair<double, double>> p_x;  // (X, probability), ascending X
  Interval hpd95;
  DensityGrid density;
  double tau_median = 0.0;
  std::size_t n_draws = 0;
  double rhat_tau = 1.0;
  double ess_tau = 0.0;
  bool convergence_warning = false;  // R-hat gate failed; summary still emitted
};

std::vector<double> default_x_list();  // 2, 4, 6 months in years

// Pools post-burn-in tau draws across surviving chains. A single-chain output
// is split in half for the R-hat gate; gate failure sets the warning flag.
RecencySummary summarize(const ChainOutput& output, double sero_interval,
                         const std::vector<double>& x_list = default_x_list(),
                         std::size_t grid_size = 201, double rhat_gate = 1.05);

// One fitted out-of-sample individual in a study table.
struct FitRecord {
  int replicate = 0;
  std::string model;
  std::string scenario;
  double tau_truth = 0.0;
  RecencySummary summary;
};

// Delimited rows (replicate, model, scenario, tauTruth, X, pX, hpdLow,
// hpdHigh, rhat, ess), one per X value, full decimal precision.
void write_fit_records(const std::vector<FitRecord>& records,
                       const std::filesystem::path& path);

}  // namespace serorec

#endif
