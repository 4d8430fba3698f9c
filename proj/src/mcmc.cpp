#include "serorec/mcmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "serorec/errors.hpp"
#include "serorec/mvn.hpp"

namespace serorec {

void SamplerConfig::validate() const {
  if (n_chains < 1) throw std::invalid_argument("sampler: need at least one chain");
  if (iterations < 1) throw std::invalid_argument("sampler: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw std::invalid_argument("sampler: burn-in must lie in [0, iterations)");
  if (thinning < 1) throw std::invalid_argument("sampler: thinning must be >= 1");
  if (adapt_window < 0) throw std::invalid_argument("sampler: adaptation window must be >= 0");
  if (burn_in < adapt_window)
    throw std::invalid_argument("sampler: burn-in must cover the adaptation window");
  if (!(target_accept_scalar > 0.0 && target_accept_scalar < 1.0) ||
      !(target_accept_vector > 0.0 && target_accept_vector < 1.0))
    throw std::invalid_argument("sampler: acceptance targets must lie in (0,1)");
  if (!(tau_step0 > 0.0) || !(beta_step0 > 0.0))
    throw std::invalid_argument("sampler: initial step sizes must be > 0");
}

double reflect_into(double x, double lo, double hi) {
  const double span = hi - lo;
  double y = std::fmod(x - lo, 2.0 * span);
  if (y < 0.0) y += 2.0 * span;
  return lo + (y <= span ? y : 2.0 * span - y);
}

namespace {

constexpr double kLogStepMin = -23.0;
constexpr double kLogStepMax = 12.0;
constexpr int kRidgeRefreshes = 12;  // (coefficients, offset) refreshes per sweep

struct InitHeuristic {
  Eigen::VectorXd mu;
  Eigen::VectorXd spread;
  std::vector<double> sigma_eps;
};

void check_compatible(const PanelDataset& data, const InferenceModel& model) {
  data.validate();
  if (static_cast<int>(data.n_biomarkers()) != model.n_biomarkers())
    throw std::invalid_argument("dataset/model biomarker count mismatch");
  for (int k = 0; k < model.n_biomarkers(); ++k)
    if (data.biomarker_names[static_cast<std::size_t>(k)] != model.biomarker_name(k))
      throw std::invalid_argument("dataset/model biomarker name mismatch at position " +
                                  std::to_string(k));
  if (model.unknown_index() >= data.individuals.size())
    throw std::invalid_argument("unknown-offset individual index out of range");
}

// per-individual curve heuristics averaged over the in-sample panel
InitHeuristic init_heuristic(const PanelDataset& data, const InferenceModel& model) {
  const int d = model.stacked_dim();
  InitHeuristic h;
  h.mu = Eigen::VectorXd::Zero(d);
  h.spread = Eigen::VectorXd::Ones(d);
  h.sigma_eps.assign(static_cast<std::size_t>(model.n_biomarkers()), 0.0);

  std::vector<Eigen::VectorXd> fits;
  std::vector<double> rss(static_cast<std::size_t>(model.n_biomarkers()), 0.0);
  std::vector<long> nobs(static_cast<std::size_t>(model.n_biomarkers()), 0);

  for (const auto& ind : data.individuals) {
    if (ind.role != Role::InSample) continue;
    if (ind.n_obs() < 2)
      throw InsufficientData("individual " + std::to_string(ind.id) +
                             ": need at least 2 observations to initialize");
    Eigen::VectorXd fit(d);
    for (int k = 0; k < model.n_biomarkers(); ++k) {
      const auto& spec = model.spec(k);
      const auto& y = ind.y[static_cast<std::size_t>(k)];
      const int off = model.offset(k);
      switch (spec.kind) {
        case GrowthKind::Linear: {
          double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
          const double m = static_cast<double>(y.size());
          for (std::size_t j = 0; j < y.size(); ++j) {
            const double s = ind.times[j] + ind.tau;
            sx += s;
            sy += y[j];
            sxx += s * s;
            sxy += s * y[j];
          }
          const double det = sxx - sx * sx / m;
          if (det < 1e-12)
            throw InsufficientData("individual " + std::to_string(ind.id) +
                                   ": need distinct observation times");
          const double slope = (sxy - sx * sy / m) / det;
          fit(off) = sy / m - slope * sx / m;
          fit(off + 1) = slope;
          break;
        }
        case GrowthKind::Nonlinear3:
          fit(off) = y.back();
          fit(off + 1) = y.front();
          fit(off + 2) = 0.0;
          break;
        case GrowthKind::ViralDecay:
          fit(off) = y.back();
          fit(off + 1) = 1.0;
          break;
      }
      const std::span<const double> beta{fit.data() + off, static_cast<std::size_t>(spec.dim())};
      for (std::size_t j = 0; j < y.size(); ++j) {
        const double res = y[j] - eval_growth(spec.kind, beta, ind.times[j] + ind.tau);
        rss[static_cast<std::size_t>(k)] += res * res;
      }
      nobs[static_cast<std::size_t>(k)] += static_cast<long>(y.size());
    }
    if (!fit.allFinite())
      throw InsufficientData("individual " + std::to_string(ind.id) +
                             ": non-finite initialization heuristics");
    fits.push_back(std::move(fit));
  }

  if (!fits.empty()) {
    for (const auto& f : fits) h.mu += f;
    h.mu /= static_cast<double>(fits.size());
    if (fits.size() >= 2) {
      Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
      for (const auto& f : fits) ss += (f - h.mu).cwiseAbs2();
      h.spread = (ss / static_cast<double>(fits.size() - 1)).cwiseSqrt().cwiseMax(1e-3);
    }
  }
  for (int k = 0; k < model.n_biomarkers(); ++k) {
    const std::size_t uk = static_cast<std::size_t>(k);
    h.sigma_eps[uk] = nobs[uk] > 0
                          ? std::max(rss[uk] / static_cast<double>(nobs[uk]), 1e-8)
                          : model.prior().eps_scale / std::max(model.prior().eps_shape - 1.0, 0.5);
  }
  return h;
}

ChainState state_from_heuristic(const InitHeuristic& h, const PanelDataset& data,
                                const InferenceModel& model) {
  const int r = model.random_dim();
  ChainState s;
  s.mu = h.mu;
  s.sigma_beta = Eigen::MatrixXd::Identity(r, r);
  s.sigma_eps = h.sigma_eps;
  s.beta.resize(static_cast<Eigen::Index>(data.individuals.size()), r);
  for (int p = 0; p < r; ++p)
    s.beta.col(p).setConstant(h.mu(model.random_coords()[static_cast<std::size_t>(p)]));
  return s;
}

}  // namespace

ChainState init_state(const PanelDataset& data, const InferenceModel& model, RngStream& rng) {
  check_compatible(data, model);
  ChainState s = state_from_heuristic(init_heuristic(data, model), data, model);
  s.tau_n = rng.uniform(model.prior().tau_min, model.prior().tau_max);
  return s;
}

struct Sampler::Impl {
  const PanelDataset& data;
  const InferenceModel& model;
  SamplerConfig cfg;
  RngStream rng;
  ChainState state;
  long iter = 0;

  int n = 0, n_bio = 0, r = 0, d = 0;
  std::size_t unknown = 0;

  Eigen::MatrixXd rss;                // n x n_bio, residual sum of squares
  std::vector<long> nobs_total;       // per biomarker

  Eigen::LLT<Eigen::MatrixXd> sigma_llt;

  double tau_log_step = 0.0;
  long tau_att = 0, tau_acc = 0;

  struct BetaAdapt {
    double log_step = 0.0;
    Eigen::MatrixXd prop_l;  // lower factor including the 2.38/sqrt(r) scaling
    bool use_emp = false;
    long count = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd m2;
    long att = 0, acc = 0;
  };
  std::vector<BetaAdapt> adapt;

  Impl(const PanelDataset& data_in, const InferenceModel& model_in, const SamplerConfig& cfg_in,
       RngStream rng_in, const ChainState* init)
      : data(data_in), model(model_in), cfg(cfg_in), rng(rng_in) {
    cfg.validate();
    check_compatible(data, model);
    n = static_cast<int>(data.individuals.size());
    n_bio = model.n_biomarkers();
    r = model.random_dim();
    d = model.stacked_dim();
    unknown = model.unknown_index();

    if (init) {
      state = *init;
      validate_state();
    } else {
      RngStream init_rng = rng.split("init");
      state = init_state(data, model, init_rng);
    }

    tau_log_step = std::log(cfg.tau_step0);
    adapt.assign(static_cast<std::size_t>(n), BetaAdapt{});
    for (auto& a : adapt) {
      a.log_step = std::log(cfg.beta_step0);
      a.mean = Eigen::VectorXd::Zero(r);
      a.m2 = Eigen::MatrixXd::Zero(r, r);
    }

    nobs_total.assign(static_cast<std::size_t>(n_bio), 0);
    for (const auto& ind : data.individuals)
      for (int k = 0; k < n_bio; ++k) nobs_total[static_cast<std::size_t>(k)] += static_cast<long>(ind.n_obs());

    rss.resize(n, n_bio);
    refresh_sigma_llt();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n_bio; ++k) rss(i, k) = compute_rss(i, k, state.beta.row(i), tau_of(i));
  }

  void validate_state() {
    if (state.mu.size() != d) throw std::invalid_argument("initial state: mean dimension mismatch");
    if (state.sigma_beta.rows() != r || state.sigma_beta.cols() != r)
      throw std::invalid_argument("initial state: covariance block dimension mismatch");
    if (state.beta.rows() != n || state.beta.cols() != r)
      throw std::invalid_argument("initial state: coefficient matrix dimension mismatch");
    if (state.sigma_eps.size() != static_cast<std::size_t>(n_bio))
      throw std::invalid_argument("initial state: error-variance count mismatch");
    for (double v : state.sigma_eps)
      if (!(v > 0.0)) throw std::invalid_argument("initial state: error variances must be > 0");
    if (!(state.tau_n >= model.prior().tau_min && state.tau_n <= model.prior().tau_max))
      throw std::invalid_argument("initial state: unknown offset outside its support");
  }

  double tau_of(int i) const {
    return static_cast<std::size_t>(i) == unknown ? state.tau_n
                                                  : data.individuals[static_cast<std::size_t>(i)].tau;
  }

  // residual sum of squares for individual i, biomarker k, with the given
  // random coordinates and offset
  template <typename Row>
  double compute_rss(int i, int k, const Row& beta_random, double tau) const {
    const Individual& ind = data.individuals[static_cast<std::size_t>(i)];
    const auto& spec = model.spec(k);
    const int off = model.offset(k);
    const int dim = spec.dim();
    double buf[8];
    for (int c = 0; c < dim; ++c) {
      const int stacked = off + c;
      buf[c] = model.coord_is_fixed(stacked) ? state.mu(stacked)
                                             : beta_random(model.random_pos(stacked));
    }
    const std::span<const double> beta{buf, static_cast<std::size_t>(dim)};
    const auto& y = ind.y[static_cast<std::size_t>(k)];
    double ss = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double res = y[j] - eval_growth(spec.kind, beta, ind.times[j] + tau);
      ss += res * res;
    }
    return ss;
  }

  void refresh_sigma_llt() {
    if (r == 0) return;
    sigma_llt.compute(state.sigma_beta);
    if (sigma_llt.info() != Eigen::Success)
      throw SingularMatrix("random-effects covariance is not positive definite");
  }

  double prior_quad(const Eigen::VectorXd& beta_random, const Eigen::VectorXd& mu_r) const {
    return sigma_llt.matrixL().solve(beta_random - mu_r).squaredNorm();
  }

  Eigen::VectorXd mu_random() const {
    Eigen::VectorXd mu_r(r);
    for (int p = 0; p < r; ++p) mu_r(p) = state.mu(model.random_coords()[static_cast<std::size_t>(p)]);
    return mu_r;
  }

  void update_mu_random() {
    if (r == 0) return;
    const GaussianMoments mom =
        full_conditional_mu(state.beta, state.sigma_beta, model.prior().mean_var);
    const Eigen::VectorXd draw = mvn_draw(mom.mean, mom.cov, rng);
    for (int p = 0; p < r; ++p) state.mu(model.random_coords()[static_cast<std::size_t>(p)]) = draw(p);
  }

  // Each fixed coordinate enters every curve linearly, so its conditional is
  // scalar Gaussian: y_ij = a_ij * x + b_ij + noise with (a, b) read off two
  // curve evaluations at the individual's other coordinates.
  void update_mu_fixed() {
    for (int c : model.fixed_coords()) {
      int k = 0;
      while (k + 1 < n_bio && model.offset(k + 1) <= c) ++k;
      const auto& spec = model.spec(k);
      const int off = model.offset(k);
      const int dim = spec.dim();
      const double sigma2 = state.sigma_eps[static_cast<std::size_t>(k)];

      double a2_sum = 0.0, ab_sum = 0.0;
      Eigen::VectorXd ss0 = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd sab = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd saa = Eigen::VectorXd::Zero(n);
      double buf[8];
      for (int i = 0; i < n; ++i) {
        const Individual& ind = data.individuals[static_cast<std::size_t>(i)];
        const double tau = tau_of(i);
        for (int cc = 0; cc < dim; ++cc) {
          const int stacked = off + cc;
          buf[cc] = model.coord_is_fixed(stacked) ? state.mu(stacked)
                                                  : state.beta(i, model.random_pos(stacked));
        }
        const std::span<const double> beta{buf, static_cast<std::size_t>(dim)};
        const auto& y = ind.y[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < y.size(); ++j) {
          const double s = ind.times[j] + tau;
          buf[c - off] = 0.0;
          const double b = eval_growth(spec.kind, beta, s);
          buf[c - off] = 1.0;
          const double a = eval_growth(spec.kind, beta, s) - b;
          const double resid0 = y[j] - b;
          a2_sum += a * a;
          ab_sum += a * resid0;
          ss0(i) += resid0 * resid0;
          sab(i) += a * resid0;
          saa(i) += a * a;
        }
      }
      const double precision = a2_sum / sigma2 + 1.0 / model.prior().mean_var;
      const double mean = (ab_sum / sigma2) / precision;
      const double x = mean + rng.normal() / std::sqrt(precision);
      state.mu(c) = x;
      for (int i = 0; i < n; ++i)
        rss(i, k) = std::max(ss0(i) - 2.0 * x * sab(i) + x * x * saa(i), 0.0);
    }
  }

  void update_sigma_beta() {
    if (r == 0) return;
    const IwParams post = full_conditional_sigma_beta(state.beta, mu_random(),
                                                      model.prior().cov_df,
                                                      model.prior().cov_scale);
    state.sigma_beta = inverse_wishart_draw(post.df, post.scale, rng);
    refresh_sigma_llt();
  }

  void update_sigma_eps() {
    for (int k = 0; k < n_bio; ++k) {
      const IgParams post = full_conditional_sigma_eps_ss(
          rss.col(k).sum(), static_cast<std::size_t>(nobs_total[static_cast<std::size_t>(k)]),
          model.prior().eps_shape, model.prior().eps_scale);
      state.sigma_eps[static_cast<std::size_t>(k)] = inverse_gamma_draw(post.shape, post.scale, rng);
    }
  }

  void update_beta_one(int i, const Eigen::VectorXd& mu_r, bool adapting, double gamma) {
    BetaAdapt& ad = adapt[static_cast<std::size_t>(i)];
    const double step = std::exp(ad.log_step);
    Eigen::VectorXd z(r), delta(r), cand(r), cand_rss(n_bio);
    for (int p = 0; p < r; ++p) z(p) = rng.normal();
    if (ad.use_emp) {
      delta.noalias() = step * (ad.prop_l * z);
    } else {
      delta = step * z;
    }
    cand = state.beta.row(i).transpose() + delta;

    double log_ratio =
        -0.5 * (prior_quad(cand, mu_r) - prior_quad(state.beta.row(i).transpose(), mu_r));
    const double tau = tau_of(i);
    for (int k = 0; k < n_bio; ++k) {
      cand_rss(k) = compute_rss(i, k, cand, tau);
      log_ratio += (rss(i, k) - cand_rss(k)) / (2.0 * state.sigma_eps[static_cast<std::size_t>(k)]);
    }
    const double alpha = std::min(1.0, std::exp(log_ratio));
    const bool accepted = rng.uniform() < alpha;
    if (accepted) {
      state.beta.row(i) = cand.transpose();
      for (int k = 0; k < n_bio; ++k) rss(i, k) = cand_rss(k);
    }
    if (adapting) {
      ad.log_step = std::clamp(ad.log_step + gamma * (alpha - cfg.target_accept_vector),
                               kLogStepMin, kLogStepMax);
      if (iter >= cfg.adapt_window / 4) {
        ad.count += 1;
        const Eigen::VectorXd x = state.beta.row(i).transpose();
        const Eigen::VectorXd d1 = x - ad.mean;
        ad.mean += d1 / static_cast<double>(ad.count);
        ad.m2.noalias() += d1 * (x - ad.mean).transpose();
      }
      if (iter >= cfg.adapt_window / 2 && ad.count >= std::max(20, 2 * r) &&
          (iter % 200 == 0 || iter == cfg.adapt_window / 2)) {
        Eigen::MatrixXd cov = ad.m2 / static_cast<double>(ad.count - 1);
        cov.diagonal().array() += 1e-10 + 1e-8 * cov.diagonal().maxCoeff();
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() == Eigen::Success) {
          ad.prop_l = Eigen::MatrixXd(llt.matrixL()) * (2.38 / std::sqrt(static_cast<double>(r)));
          if (!ad.use_emp) {
            ad.use_emp = true;
            ad.log_step = 0.0;
          }
        }
      }
    } else {
      ad.att += 1;
      if (accepted) ad.acc += 1;
    }
  }

  void update_beta() {
    if (r == 0) return;
    const Eigen::VectorXd mu_r = mu_random();
    const bool adapting = iter <= cfg.adapt_window;
    const double gamma = adapting ? std::pow(static_cast<double>(iter), -0.6) : 0.0;
    for (int i = 0; i < n; ++i) update_beta_one(i, mu_r, adapting, gamma);
  }

  void update_tau() {
    const double lo = model.prior().tau_min;
    const double hi = model.prior().tau_max;
    const double step = std::exp(tau_log_step);
    const double cand = reflect_into(state.tau_n + step * rng.normal(), lo, hi);

    const int u = static_cast<int>(unknown);
    double log_ratio = 0.0;
    Eigen::VectorXd cand_rss(n_bio);
    for (int k = 0; k < n_bio; ++k) {
      cand_rss(k) = compute_rss(u, k, state.beta.row(u), cand);
      log_ratio += (rss(u, k) - cand_rss(k)) / (2.0 * state.sigma_eps[static_cast<std::size_t>(k)]);
    }
    const double alpha = std::min(1.0, std::exp(log_ratio));
    const bool accepted = rng.uniform() < alpha;
    if (accepted) {
      state.tau_n = cand;
      for (int k = 0; k < n_bio; ++k) rss(u, k) = cand_rss(k);
    }
    if (iter <= cfg.adapt_window) {
      const double gamma = std::pow(static_cast<double>(iter), -0.6);
      tau_log_step = std::clamp(tau_log_step + gamma * (alpha - cfg.target_accept_scalar),
                                kLogStepMin, kLogStepMax);
    } else {
      tau_att += 1;
      if (accepted) tau_acc += 1;
    }
  }

  void step() {
    ++iter;
    try {
      if (cfg.update.mu) {
        update_mu_random();
        update_mu_fixed();
      }
      if (cfg.update.sigma_beta) update_sigma_beta();
      if (cfg.update.sigma_eps) update_sigma_eps();
      if (cfg.update.beta) update_beta();
      if (cfg.update.tau) update_tau();
      // The offset and the analysed individual's coefficients form a likelihood
      // ridge; extra alternating refreshes of just that pair cut the walk time
      // along it. Both touch only the analysed individual's handful of
      // observations, so the added cost per sweep is negligible.
      if (cfg.update.beta && cfg.update.tau && r > 0) {
        const Eigen::VectorXd mu_r = mu_random();
        const bool adapting = iter <= cfg.adapt_window;
        const double gamma = adapting ? std::pow(static_cast<double>(iter), -0.6) : 0.0;
        for (int rep = 1; rep < kRidgeRefreshes; ++rep) {
          update_beta_one(static_cast<int>(unknown), mu_r, adapting, gamma);
          update_tau();
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(e.what()) + " (iteration " + std::to_string(iter) + ")");
    }
  }
};

Sampler::Sampler(const PanelDataset& data, const InferenceModel& model, const SamplerConfig& cfg,
                 RngStream rng, const ChainState* init)
    : impl_(std::make_unique<Impl>(data, model, cfg, rng, init)) {}

Sampler::~Sampler() = default;
Sampler::Sampler(Sampler&&) noexcept = default;
Sampler& Sampler::operator=(Sampler&&) noexcept = default;

void Sampler::step() { impl_->step(); }
const ChainState& Sampler::state() const { return impl_->state; }
long Sampler::iteration() const { return impl_->iter; }

double Sampler::tau_acceptance() const {
  return impl_->tau_att > 0 ? static_cast<double>(impl_->tau_acc) / static_cast<double>(impl_->tau_att)
                            : 0.0;
}

double Sampler::beta_acceptance() const {
  long att = 0, acc = 0;
  for (const auto& a : impl_->adapt) {
    att += a.att;
    acc += a.acc;
  }
  return att > 0 ? static_cast<double>(acc) / static_cast<double>(att) : 0.0;
}

std::vector<std::string> param_names(const PanelDataset& data, const InferenceModel& model) {
  const int r = model.random_dim();
  std::vector<std::string> names;
  names.emplace_back("tau_n");
  for (int c = 0; c < model.stacked_dim(); ++c) names.push_back("mu." + std::to_string(c));
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j)
      names.push_back("sigma_beta." + std::to_string(i) + "." + std::to_string(j));
  for (int k = 0; k < model.n_biomarkers(); ++k) names.push_back("sigma_eps." + std::to_string(k));
  for (const auto& ind : data.individuals)
    for (int p = 0; p < r; ++p)
      names.push_back("beta." + std::to_string(ind.id) + "." + std::to_string(p));
  return names;
}

namespace {

void flatten_state(const ChainState& s, const InferenceModel& model, double* out) {
  std::size_t c = 0;
  out[c++] = s.tau_n;
  for (Eigen::Index i = 0; i < s.mu.size(); ++i) out[c++] = s.mu(i);
  const int r = model.random_dim();
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j) out[c++] = s.sigma_beta(i, j);
  for (double v : s.sigma_eps) out[c++] = v;
  for (Eigen::Index i = 0; i < s.beta.rows(); ++i)
    for (int p = 0; p < r; ++p) out[c++] = s.beta(i, p);
}

ChainRun run_single_chain(const PanelDataset& data, const InferenceModel& model,
                          const SamplerConfig& cfg, RngStream stream, const ChainState* init,
                          std::size_t n_params) {
  ChainRun run;
  run.seed = stream.key();
  const long retained = cfg.retained_per_chain();
  run.draws.resize(retained, static_cast<Eigen::Index>(n_params));
  std::vector<double> buf(n_params);
  try {
    Sampler sampler(data, model, cfg, stream, init);
    long row = 0;
    for (long it = 1; it <= cfg.iterations; ++it) {
      sampler.step();
      if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) {
        flatten_state(sampler.state(), model, buf.data());
        for (std::size_t j = 0; j < n_params; ++j)
          run.draws(row, static_cast<Eigen::Index>(j)) = buf[j];
        ++row;
      }
    }
    run.accept_tau = sampler.tau_acceptance();
    run.accept_beta = sampler.beta_acceptance();
  } catch (const std::exception& e) {
    run.failed = true;
    run.error = e.what();
    run.draws.resize(0, static_cast<Eigen::Index>(n_params));
  }
  return run;
}

}  // namespace

std::size_t ChainOutput::column(const std::string& name) const {
  for (std::size_t i = 0; i < param_names.size(); ++i)
    if (param_names[i] == name) return i;
  throw std::invalid_argument("unknown parameter name: " + name);
}

std::vector<std::vector<double>> ChainOutput::per_chain(std::size_t col) const {
  std::vector<std::vector<double>> out;
  for (const auto& run : chains) {
    if (run.failed) continue;
    std::vector<double> v(static_cast<std::size_t>(run.draws.rows()));
    for (Eigen::Index i = 0; i < run.draws.rows(); ++i)
      v[static_cast<std::size_t>(i)] = run.draws(i, static_cast<Eigen::Index>(col));
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> ChainOutput::pooled(std::size_t col) const {
  std::vector<double> out;
  for (const auto& run : chains) {
    if (run.failed) continue;
    for (Eigen::Index i = 0; i < run.draws.rows(); ++i)
      out.push_back(run.draws(i, static_cast<Eigen::Index>(col)));
  }
  return out;
}

std::size_t ChainOutput::n_failed() const {
  std::size_t f = 0;
  for (const auto& run : chains)
    if (run.failed) ++f;
  return f;
}

ChainOutput run_chain(const PanelDataset& data, const InferenceModel& model,
                      const SamplerConfig& cfg, const ChainState* init) {
  cfg.validate();
  check_compatible(data, model);
  const auto t0 = std::chrono::steady_clock::now();

  ChainOutput out;
  out.config = cfg;
  out.param_names = param_names(data, model);
  const std::size_t n_params = out.param_names.size();
  out.chains.resize(static_cast<std::size_t>(cfg.n_chains));

  const RngStream root(cfg.seed);
  // shared heuristic base; per-chain jitter overdisperses the starting points
  ChainState base;
  Eigen::VectorXd spread;
  if (!init) {
    const InitHeuristic h = init_heuristic(data, model);
    base = state_from_heuristic(h, data, model);
    spread = h.spread;
  }

  auto make_start = [&](int c, RngStream& stream) -> ChainState {
    if (init) return *init;
    ChainState s = base;
    for (Eigen::Index j = 0; j < s.mu.size(); ++j)
      s.mu(j) += stream.uniform(-2.0, 2.0) * spread(j);
    for (int p = 0; p < model.random_dim(); ++p)
      s.beta.col(p).setConstant(s.mu(model.random_coords()[static_cast<std::size_t>(p)]));
    s.tau_n = stream.uniform(model.prior().tau_min, model.prior().tau_max);
    (void)c;
    return s;
  };

  auto run_one = [&](int c) {
    RngStream stream = root.split("chain").split(static_cast<std::uint64_t>(c));
    const ChainState start = make_start(c, stream);
    out.chains[static_cast<std::size_t>(c)] =
        run_single_chain(data, model, cfg, stream, &start, n_params);
  };

  if (cfg.parallel_chains && cfg.n_chains > 1) {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(cfg.n_chains));
    for (int c = 0; c < cfg.n_chains; ++c) pool.emplace_back(run_one, c);
    for (auto& t : pool) t.join();
  } else {
    for (int c = 0; c < cfg.n_chains; ++c) run_one(c);
  }

  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace serorec
