#ifndef SEROREC_BAYES_HPP
#define SEROREC_BAYES_HPP

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "serorec/dataset.hpp"
#include "serorec/growth.hpp"
#include "serorec/scenario.hpp"

namespace serorec {

struct PriorSpec {
  double tau_min = 0.0;
  double tau_max = 1.0;          // seroconversion-interval length
  double mean_var = 1e6;         // N(0, mean_var) per population-mean coordinate
  double eps_shape = 2.0;        // inverse-gamma on each error variance
  double eps_scale = 0.01;
  double cov_df = 0.0;           // 0 = use random-block dimension + 1
  Eigen::MatrixXd cov_scale;     // empty = identity on the random block

  void validate() const;
};

// Analysis-side model: curve structure per biomarker, which coordinates are
// shared fixed effects vs individual random effects, which individual's
// seroconversion offset is unknown, and the prior hyperparameters. Carries no
// generative population values. Fixed effects live in the population mean with
// the vague Gaussian prior and are excluded from the covariance block; only
// coordinates the curve depends on linearly may be fixed.
class InferenceModel {
 public:
  InferenceModel(std::vector<BiomarkerConfig> biomarkers, std::size_t unknown_index,
                 double sero_interval, PriorSpec prior = {});
  static InferenceModel from_model_config(const ModelConfig& config, std::size_t unknown_index,
                                          double sero_interval);

  int n_biomarkers() const { return static_cast<int>(biomarkers_.size()); }
  const GrowthModelSpec& spec(int k) const { return biomarkers_[check_k(k)].spec; }
  const std::string& biomarker_name(int k) const { return biomarkers_[check_k(k)].name; }
  int stacked_dim() const { return stacked_dim_; }
  int random_dim() const { return static_cast<int>(random_coords_.size()); }
  int offset(int k) const { return offsets_[check_k(k)]; }
  const std::vector<int>& random_coords() const { return random_coords_; }
  const std::vector<int>& fixed_coords() const { return fixed_coords_; }
  bool coord_is_fixed(int c) const { return coord_fixed_[static_cast<std::size_t>(c)]; }
  // position of stacked coordinate c within the random block, -1 when fixed
  int random_pos(int c) const { return random_pos_[static_cast<std::size_t>(c)]; }
  std::size_t unknown_index() const { return unknown_index_; }
  double sero_interval() const { return prior_.tau_max; }
  const PriorSpec& prior() const { return prior_; }

  // Stacked coefficient vector for one individual: fixed coordinates from the
  // population mean, random coordinates from that individual's row.
  Eigen::VectorXd fold(const Eigen::VectorXd& mu,
                       const Eigen::VectorXd& beta_random) const;

 private:
  std::size_t check_k(int k) const;
  std::vector<BiomarkerConfig> biomarkers_;
  std::size_t unknown_index_;
  PriorSpec prior_;
  int stacked_dim_ = 0;
  std::vector<int> offsets_;
  std::vector<int> random_coords_;
  std::vector<int> fixed_coords_;
  std::vector<bool> coord_fixed_;
  std::vector<int> random_pos_;
};

// Sampler state. beta holds one row per individual over the random
// coordinates; sigma_beta covers the random block only.
struct ChainState {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma_beta;
  std::vector<double> sigma_eps;
  Eigen::MatrixXd beta;
  double tau_n = 0.5;
};

// Gaussian log-likelihood of one subject's series around the curve at
// s = t + tau with i.i.d. error variance sigma2.
double loglik_individual_univariate(std::span<const double> y, std::span<const double> t,
                                    double tau, std::span<const double> beta, double sigma2,
                                    const GrowthModelSpec& spec);

// Two biomarkers with independent errors: the sum of the univariate terms.
double loglik_individual_bivariate(std::span<const double> y1, std::span<const double> y2,
                                   std::span<const double> t, double tau,
                                   std::span<const double> beta1, std::span<const double> beta2,
                                   const std::array<double, 2>& sigma2, const BivariateSpec& spec);

// Complete-data log-likelihood of a dataset under a state (known offsets for
// all individuals except the model's unknown one, which uses state.tau_n).
double loglik_dataset(const ChainState& state, const PanelDataset& data,
                      const InferenceModel& model);

// Joint log-prior: flat tau_n on its interval (-inf outside, never a throw),
// vague Gaussian means, inverse-gamma error variances, inverse-Wishart on the
// random covariance block, and the population MVN term per individual.
double logprior(const ChainState& state, const InferenceModel& model);

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conjugate normal-normal update of the population mean over the random block;
// beta is n x r. n = 0 returns the prior.
GaussianMoments full_conditional_mu(const Eigen::MatrixXd& beta,
                                    const Eigen::MatrixXd& sigma_beta, double prior_mean_var);

struct IwParams {
  double df;
  Eigen::MatrixXd scale;
};

IwParams full_conditional_sigma_beta(const Eigen::MatrixXd& beta, const Eigen::VectorXd& mu_random,
                                     double prior_df, const Eigen::MatrixXd& prior_scale);

struct IgParams {
  double shape;
  double scale;
};

IgParams full_conditional_sigma_eps(std::span<const double> residuals, double prior_shape,
                                    double prior_scale);
IgParams full_conditional_sigma_eps_ss(double residual_ss, std::size_t n_residuals,
                                       double prior_shape, double prior_scale);

}  // namespace serorec

#endif
