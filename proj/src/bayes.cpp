#include "serorec/bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "serorec/errors.hpp"
#include "serorec/mvn.hpp"
#include "serorec/stats.hpp"

namespace serorec {

void PriorSpec::validate() const {
  if (!(tau_max > tau_min)) throw std::invalid_argument("tau prior bounds out of order");
  if (!(mean_var > 0.0)) throw std::invalid_argument("mean prior variance must be > 0");
  if (!(eps_shape > 0.0) || !(eps_scale > 0.0))
    throw std::invalid_argument("error-variance prior hyperparameters must be > 0");
  if (cov_df < 0.0) throw std::invalid_argument("covariance prior df must be >= 0");
}

InferenceModel::InferenceModel(std::vector<BiomarkerConfig> biomarkers, std::size_t unknown_index,
                               double sero_interval, PriorSpec prior)
    : biomarkers_(std::move(biomarkers)), unknown_index_(unknown_index), prior_(std::move(prior)) {
  if (biomarkers_.empty() || biomarkers_.size() > 2)
    throw std::invalid_argument("model must have one or two biomarkers");
  if (!(sero_interval > 0.0)) throw std::invalid_argument("sero_interval must be > 0");
  prior_.tau_min = 0.0;
  prior_.tau_max = sero_interval;
  prior_.validate();

  for (const auto& b : biomarkers_) {
    b.spec.validate();
    offsets_.push_back(stacked_dim_);
    for (int c = 0; c < b.spec.dim(); ++c) {
      const int stacked = stacked_dim_ + c;
      if (b.spec.is_fixed(c)) {
        if (!growth_coord_is_linear(b.spec.kind, c))
          throw std::invalid_argument(
              "fixed-effect coordinate must enter the curve linearly (biomarker '" + b.name +
              "', coordinate " + std::to_string(c) + ")");
        fixed_coords_.push_back(stacked);
        coord_fixed_.push_back(true);
        random_pos_.push_back(-1);
      } else {
        random_pos_.push_back(static_cast<int>(random_coords_.size()));
        random_coords_.push_back(stacked);
        coord_fixed_.push_back(false);
      }
    }
    stacked_dim_ += b.spec.dim();
  }

  const int r = random_dim();
  if (prior_.cov_df == 0.0) prior_.cov_df = static_cast<double>(r) + 1.0;
  if (prior_.cov_scale.size() == 0) prior_.cov_scale = Eigen::MatrixXd::Identity(r, r);
  if (prior_.cov_scale.rows() != r || prior_.cov_scale.cols() != r)
    throw std::invalid_argument("covariance prior scale does not match the random block");
  if (r > 0 && !(prior_.cov_df > static_cast<double>(r) - 1.0))
    throw std::invalid_argument("covariance prior df must exceed random dimension - 1");
}

InferenceModel InferenceModel::from_model_config(const ModelConfig& config,
                                                 std::size_t unknown_index,
                                                 double sero_interval) {
  config.validate();
  return InferenceModel(config.biomarkers, unknown_index, sero_interval);
}

std::size_t InferenceModel::check_k(int k) const {
  if (k < 0 || k >= n_biomarkers()) throw std::invalid_argument("biomarker index out of range");
  return static_cast<std::size_t>(k);
}

Eigen::VectorXd InferenceModel::fold(const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& beta_random) const {
  if (mu.size() != stacked_dim_) throw std::invalid_argument("fold: mean dimension mismatch");
  if (beta_random.size() != random_dim())
    throw std::invalid_argument("fold: random-coordinate dimension mismatch");
  Eigen::VectorXd out(stacked_dim_);
  for (int c = 0; c < stacked_dim_; ++c)
    out(c) = coord_fixed_[static_cast<std::size_t>(c)] ? mu(c) : beta_random(random_pos(c));
  return out;
}

double loglik_individual_univariate(std::span<const double> y, std::span<const double> t,
                                    double tau, std::span<const double> beta, double sigma2,
                                    const GrowthModelSpec& spec) {
  if (y.size() != t.size()) throw std::invalid_argument("loglik: y/t length mismatch");
  if (!(sigma2 > 0.0)) throw std::domain_error("loglik: error variance must be > 0");
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * sigma2);
  double ll = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double r = y[j] - eval_growth(spec.kind, beta, t[j] + tau);
    ll += log_norm - 0.5 * r * r / sigma2;
  }
  return ll;
}

double loglik_individual_bivariate(std::span<const double> y1, std::span<const double> y2,
                                   std::span<const double> t, double tau,
                                   std::span<const double> beta1, std::span<const double> beta2,
                                   const std::array<double, 2>& sigma2, const BivariateSpec& spec) {
  return loglik_individual_univariate(y1, t, tau, beta1, sigma2[0], spec.first) +
         loglik_individual_univariate(y2, t, tau, beta2, sigma2[1], spec.second);
}

double loglik_dataset(const ChainState& state, const PanelDataset& data,
                      const InferenceModel& model) {
  if (static_cast<int>(data.n_biomarkers()) != model.n_biomarkers())
    throw std::invalid_argument("dataset/model biomarker count mismatch");
  if (state.beta.rows() != static_cast<Eigen::Index>(data.individuals.size()))
    throw std::invalid_argument("state has wrong number of individuals");
  double ll = 0.0;
  for (std::size_t i = 0; i < data.individuals.size(); ++i) {
    const Individual& ind = data.individuals[i];
    const double tau = i == model.unknown_index() ? state.tau_n : ind.tau;
    const Eigen::VectorXd full =
        model.fold(state.mu, state.beta.row(static_cast<Eigen::Index>(i)).transpose());
    for (int k = 0; k < model.n_biomarkers(); ++k) {
      const auto& spec = model.spec(k);
      const std::span<const double> beta{full.data() + model.offset(k),
                                         static_cast<std::size_t>(spec.dim())};
      ll += loglik_individual_univariate(ind.y[static_cast<std::size_t>(k)], ind.times, tau, beta,
                                         state.sigma_eps[static_cast<std::size_t>(k)], spec);
    }
  }
  return ll;
}

double logprior(const ChainState& state, const InferenceModel& model) {
  const PriorSpec& prior = model.prior();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(state.tau_n >= prior.tau_min && state.tau_n <= prior.tau_max)) return kNegInf;
  double lp = -std::log(prior.tau_max - prior.tau_min);

  if (state.mu.size() != model.stacked_dim())
    throw std::invalid_argument("logprior: mean dimension mismatch");
  for (Eigen::Index c = 0; c < state.mu.size(); ++c)
    lp += normal_logpdf(state.mu(c), 0.0, prior.mean_var);

  if (state.sigma_eps.size() != static_cast<std::size_t>(model.n_biomarkers()))
    throw std::invalid_argument("logprior: error-variance count mismatch");
  for (double s2 : state.sigma_eps)
    lp += inverse_gamma_logpdf(s2, prior.eps_shape, prior.eps_scale);

  const int r = model.random_dim();
  if (r > 0) {
    if (state.sigma_beta.rows() != r || state.sigma_beta.cols() != r)
      throw std::invalid_argument("logprior: covariance block dimension mismatch");
    try {
      lp += inverse_wishart_logpdf(state.sigma_beta, prior.cov_df, prior.cov_scale);
    } catch (const SingularMatrix&) {
      return kNegInf;
    }
    Eigen::VectorXd mu_r(r);
    for (int p = 0; p < r; ++p) mu_r(p) = state.mu(model.random_coords()[static_cast<std::size_t>(p)]);
    for (Eigen::Index i = 0; i < state.beta.rows(); ++i)
      lp += mvn_logpdf(state.beta.row(i).transpose(), mu_r, state.sigma_beta);
  }
  return lp;
}

GaussianMoments full_conditional_mu(const Eigen::MatrixXd& beta,
                                    const Eigen::MatrixXd& sigma_beta, double prior_mean_var) {
  const Eigen::Index r = sigma_beta.rows();
  if (sigma_beta.cols() != r) throw std::invalid_argument("covariance block is not square");
  if (beta.rows() > 0 && beta.cols() != r)
    throw std::invalid_argument("coefficient rows do not match covariance block");
  if (!(prior_mean_var > 0.0)) throw std::invalid_argument("prior variance must be > 0");

  const double n = static_cast<double>(beta.rows());
  if (beta.rows() == 0)
    return {Eigen::VectorXd::Zero(r), prior_mean_var * Eigen::MatrixXd::Identity(r, r)};

  Eigen::LLT<Eigen::MatrixXd> llt(sigma_beta);
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("full_conditional_mu: covariance block is not positive definite");
  const Eigen::MatrixXd sigma_inv = llt.solve(Eigen::MatrixXd::Identity(r, r));
  const Eigen::MatrixXd precision =
      n * sigma_inv + Eigen::MatrixXd::Identity(r, r) / prior_mean_var;
  Eigen::LLT<Eigen::MatrixXd> lp(precision);
  if (lp.info() != Eigen::Success)
    throw SingularMatrix("full_conditional_mu: singular precision");
  const Eigen::VectorXd beta_sum = beta.colwise().sum().transpose();
  GaussianMoments out;
  out.cov = lp.solve(Eigen::MatrixXd::Identity(r, r));
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.mean = lp.solve(sigma_inv * beta_sum);
  return out;
}

IwParams full_conditional_sigma_beta(const Eigen::MatrixXd& beta, const Eigen::VectorXd& mu_random,
                                     double prior_df, const Eigen::MatrixXd& prior_scale) {
  const Eigen::Index r = prior_scale.rows();
  if (prior_scale.cols() != r) throw std::invalid_argument("prior scale is not square");
  if (mu_random.size() != r) throw std::invalid_argument("mean does not match prior scale");
  if (beta.rows() > 0 && beta.cols() != r)
    throw std::invalid_argument("coefficient rows do not match prior scale");
  IwParams out{prior_df + static_cast<double>(beta.rows()), prior_scale};
  for (Eigen::Index i = 0; i < beta.rows(); ++i) {
    const Eigen::VectorXd d = beta.row(i).transpose() - mu_random;
    out.scale += d * d.transpose();
  }
  return out;
}

IgParams full_conditional_sigma_eps(std::span<const double> residuals, double prior_shape,
                                    double prior_scale) {
  double ss = 0.0;
  for (double r : residuals) ss += r * r;
  return full_conditional_sigma_eps_ss(ss, residuals.size(), prior_shape, prior_scale);
}

IgParams full_conditional_sigma_eps_ss(double residual_ss, std::size_t n_residuals,
                                       double prior_shape, double prior_scale) {
  if (!(prior_shape > 0.0) || !(prior_scale > 0.0))
    throw std::invalid_argument("prior hyperparameters must be > 0");
  if (residual_ss < 0.0) throw std::invalid_argument("residual sum of squares must be >= 0");
  return {prior_shape + 0.5 * static_cast<double>(n_residuals),
          prior_scale + 0.5 * residual_ss};
}

}  // namespace serorec
